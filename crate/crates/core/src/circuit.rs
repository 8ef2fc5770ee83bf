//! The circuit text format.
//!
//! ```text
//! ; comment
//! (scope 3)
//! (and x1 (not x2))
//! ```
//!
//! Atoms are `true`, `false` and `xK`; operators are `not`, `and`, `or`.
//! `and`/`or` accept one or more operands and fold to the right; the printer
//! only ever emits binary nodes, so printing and re-parsing is the identity.
//! A `;` starts a comment running to the end of the line.

use std::fmt::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Formula, Node, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            let column = line[..i].chars().count() + 1;
            match c {
                ';' => break,
                '(' | ')' => {
                    chars.next();
                    out.push(Token {
                        tok: if c == '(' { Tok::Open } else { Tok::Close },
                        line: ln + 1,
                        column,
                    });
                }
                c if c.is_whitespace() => {
                    chars.next();
                }
                _ => {
                    let mut atom = String::new();
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                            break;
                        }
                        atom.push(c);
                        chars.next();
                    }
                    out.push(Token {
                        tok: Tok::Atom(atom),
                        line: ln + 1,
                        column,
                    });
                }
            }
        }
    }
    out
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    scope: u32,
}

impl Parser {
    fn error_at(&self, at: Option<&Token>, message: impl Into<String>) -> Error {
        let (line, column) = at.map_or(self.end, |t| (t.line, t.column));
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.error_at(None, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_atom(&mut self, what: &str) -> Result<(String, Token)> {
        let t = self.next()?;
        match &t.tok {
            Tok::Atom(a) => Ok((a.clone(), t.clone())),
            _ => Err(self.error_at(Some(&t), format!("expected {what}"))),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        let t = self.next()?;
        if t.tok != Tok::Close {
            return Err(self.error_at(Some(&t), "expected ')'"));
        }
        Ok(())
    }

    fn header(&mut self) -> Result<()> {
        let t = self.next()?;
        if t.tok != Tok::Open {
            return Err(self.error_at(Some(&t), "expected '(scope N)' header"));
        }
        let (kw, kt) = self.expect_atom("'scope'")?;
        if kw != "scope" {
            return Err(self.error_at(Some(&kt), "expected '(scope N)' header"));
        }
        let (n, nt) = self.expect_atom("scope width")?;
        self.scope = n
            .parse()
            .map_err(|_| self.error_at(Some(&nt), format!("invalid scope width '{n}'")))?;
        self.expect_close()
    }

    fn expr(&mut self) -> Result<Arc<Node>> {
        let t = self.next()?;
        match &t.tok {
            Tok::Close => Err(self.error_at(Some(&t), "unexpected ')'")),
            Tok::Atom(a) => self.atom(a, &t),
            Tok::Open => {
                let (op, ot) = self.expect_atom("operator")?;
                let mut args = Vec::new();
                while self.tokens.get(self.pos).map(|t| &t.tok) != Some(&Tok::Close) {
                    if self.pos >= self.tokens.len() {
                        return Err(self.error_at(None, "unclosed '('"));
                    }
                    args.push(self.expr()?);
                }
                self.pos += 1;
                match op.as_str() {
                    "not" if args.len() == 1 => Ok(Node::not(args.pop().unwrap())),
                    "not" => Err(self.error_at(Some(&ot), "'not' takes exactly one operand")),
                    "and" => Node::conjunction(args)
                        .ok_or_else(|| self.error_at(Some(&ot), "'and' needs an operand")),
                    "or" => Node::disjunction(args)
                        .ok_or_else(|| self.error_at(Some(&ot), "'or' needs an operand")),
                    _ => Err(self.error_at(Some(&ot), format!("unknown operator '{op}'"))),
                }
            }
        }
    }

    fn atom(&self, a: &str, t: &Token) -> Result<Arc<Node>> {
        match a {
            "true" => Ok(Node::constant(true)),
            "false" => Ok(Node::constant(false)),
            _ => {
                let index: u32 = a
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| self.error_at(Some(t), format!("unknown atom '{a}'")))?;
                let v = VarId::new(index).map_err(|e| self.error_at(Some(t), e.to_string()))?;
                if index > self.scope {
                    return Err(Error::VarOutOfScope {
                        var: index,
                        scope: self.scope,
                    });
                }
                Ok(Arc::new(Node::Var(v)))
            }
        }
    }
}

pub fn parse_circuit(text: &str) -> Result<Formula> {
    let tokens = tokenize(text);
    let lines = text.lines().count().max(1);
    let end = (lines, text.lines().last().map_or(0, |l| l.chars().count()) + 1);
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
        scope: 0,
    };
    p.header()?;
    let root = p.expr()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(p.error_at(Some(t), "trailing input after formula"));
    }
    Formula::new(root, p.scope)
}

/// Canonical text: the header line, then the formula on one line.
pub fn print_circuit(f: &Formula) -> String {
    let mut out = format!("(scope {})\n", f.scope());
    write_node(&mut out, f.root());
    out.push('\n');
    out
}

fn write_node(out: &mut String, node: &Node) {
    match node {
        Node::True => out.push_str("true"),
        Node::False => out.push_str("false"),
        Node::Var(v) => write!(out, "{v}").unwrap(),
        Node::Not(a) => {
            out.push_str("(not ");
            write_node(out, a);
            out.push(')');
        }
        Node::And(a, b) | Node::Or(a, b) => {
            out.push_str(if matches!(node, Node::And(..)) {
                "(and "
            } else {
                "(or "
            });
            write_node(out, a);
            out.push(' ');
            write_node(out, b);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_examples() {
        let f = parse_circuit("(scope 2) (or x1 x2)").unwrap();
        assert_eq!(f, Formula::new(Node::or(Node::var(1), Node::var(2)), 2).unwrap());

        let f = parse_circuit("(scope 3) (and x1 (not x2))").unwrap();
        let expected = Node::and(Node::var(1), Node::not(Node::var(2)));
        assert_eq!(f, Formula::new(expected, 3).unwrap());

        assert_eq!(
            parse_circuit("(scope 1) (or x1 x2)"),
            Err(Error::VarOutOfScope { var: 2, scope: 1 })
        );
    }

    #[test]
    fn nary_folds_right() {
        let f = parse_circuit("(scope 3)\n(and x1 x2 x3)").unwrap();
        let expected = Node::and(Node::var(1), Node::and(Node::var(2), Node::var(3)));
        assert_eq!(f.root(), &expected);
        let g = parse_circuit("(scope 1) (or x1)").unwrap();
        assert_eq!(g.root(), &Node::var(1));
    }

    #[test]
    fn comments_and_constants() {
        let f = parse_circuit("; header follows\n(scope 2) ; two vars\ntrue\n").unwrap();
        assert_eq!(f, Formula::constant(true, 2));
        let g = parse_circuit("(scope 0) (not false)").unwrap();
        assert_eq!(g.size(), 1);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_circuit("(scope 2)\n(or x1 y2)") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_circuit("(scope 2) (or x1 x2"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_circuit("(scope 2) (not x1 x2)"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_circuit("(scope 2) x1 x2"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(parse_circuit("(or x1)"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_circuit("(scope 2) (and)"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_circuit("(scope 2) x0"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn print_is_canonical() {
        let f = parse_circuit("(scope 4) (or x1 x2 (not x4))").unwrap();
        assert_eq!(print_circuit(&f), "(scope 4)\n(or x1 (or x2 (not x4)))\n");
    }
}
