//! DIMACS CNF ingestion.
//!
//! The result is a right-folded conjunction of right-folded clause
//! disjunctions over the declared variable count. No simplification is done:
//! tautologous clauses are kept, an empty clause becomes `false` and a
//! clause-free file becomes `true`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Formula, Node};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Dimacs {
        line,
        message: message.into(),
    }
}

pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Arc<Node>> = Vec::new();
    let mut current: Vec<Arc<Node>> = Vec::new();
    let mut open_since = 0;
    let mut last_line = 0;

    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        last_line = ln;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(ln, "duplicate problem line"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", vars, count] => vars.parse().ok().zip(count.parse().ok()),
                _ => None,
            };
            header =
                Some(parsed.ok_or_else(|| err(ln, "malformed header, expected 'p cnf <vars> <clauses>'"))?);
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err(ln, "clause before 'p cnf' header"));
        };
        for word in trimmed.split_whitespace() {
            let lit: i64 = word
                .parse()
                .map_err(|_| err(ln, format!("invalid literal '{word}'")))?;
            if lit == 0 {
                let clause = std::mem::take(&mut current);
                clauses.push(Node::disjunction(clause).unwrap_or_else(|| Node::constant(false)));
                continue;
            }
            let index = lit.unsigned_abs();
            if index > u64::from(vars) {
                return Err(err(ln, format!("literal {lit} exceeds declared {vars} variables")));
            }
            if current.is_empty() {
                open_since = ln;
            }
            let v = Node::var(index as u32);
            current.push(if lit < 0 { Node::not(v) } else { v });
        }
    }

    let (vars, declared) = header.ok_or_else(|| err(last_line.max(1), "missing 'p cnf' header"))?;
    if !current.is_empty() {
        return Err(err(open_since, "unterminated clause (missing trailing 0)"));
    }
    if clauses.len() != declared {
        return Err(err(
            last_line.max(1),
            format!("header declares {declared} clauses, found {}", clauses.len()),
        ));
    }
    let root = Node::conjunction(clauses).unwrap_or_else(|| Node::constant(true));
    Ok(Formula::from_parts(root, vars))
}
