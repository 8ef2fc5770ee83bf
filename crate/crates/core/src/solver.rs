//! DMAX#SAT and MAX#SAT over instances whose scope is split into a chooser
//! block `x` and a counted block `y`.
//!
//! Chooser assignments are ordered lexicographically along `x_vars` with
//! `false < true` and the first chooser variable most significant. Every
//! engine returns the least qualifying assignment, so witnesses are
//! reproducible and engines can be compared exactly.

use std::fmt;

use num_traits::{One, Zero};

use crate::count::{pow2, Count, Counter, NodeId};
use crate::error::{Error, Result};
use crate::formula::{Formula, VarId};

/// Default limit on the number of chooser variables enumerated.
pub const DEFAULT_CHOOSER_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitInstance {
    formula: Formula,
    x_vars: Vec<VarId>,
    y_vars: Vec<VarId>,
    bound: Option<Count>,
}

impl SplitInstance {
    /// `x_vars` and `y_vars` must be disjoint and cover the scope exactly.
    pub fn new(
        formula: Formula,
        x_vars: Vec<VarId>,
        y_vars: Vec<VarId>,
        bound: Option<Count>,
    ) -> Result<SplitInstance> {
        let scope = formula.scope();
        let mut seen = vec![false; scope as usize];
        for v in x_vars.iter().chain(&y_vars) {
            if v.index() > scope {
                return Err(Error::Blocks(format!("{v} is outside scope {scope}")));
            }
            if std::mem::replace(&mut seen[v.offset()], true) {
                return Err(Error::Blocks(format!("{v} is listed twice")));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Blocks(format!("x{} is in neither block", missing + 1)));
        }
        let inst = SplitInstance {
            formula,
            x_vars,
            y_vars,
            bound: None,
        };
        match bound {
            Some(b) => inst.with_bound(b),
            None => Ok(inst),
        }
    }

    /// Chooser block as given; every other scope variable is counted.
    pub fn from_chooser(formula: Formula, x_vars: Vec<VarId>) -> Result<SplitInstance> {
        let mut is_x = vec![false; formula.scope() as usize];
        for v in &x_vars {
            if v.index() > formula.scope() {
                return Err(Error::Blocks(format!("{v} is outside scope {}", formula.scope())));
            }
            is_x[v.offset()] = true;
        }
        let y_vars = (1..=formula.scope())
            .filter(|&i| !is_x[i as usize - 1])
            .map(|i| VarId::new(i).expect("1-based"))
            .collect();
        SplitInstance::new(formula, x_vars, y_vars, None)
    }

    /// Bounds above `2^|y| + 1` are rejected.
    pub fn with_bound(mut self, bound: Count) -> Result<SplitInstance> {
        let cap = pow2(self.y_vars.len()) + 1u32;
        if bound > cap {
            return Err(Error::Range {
                what: "bound",
                value: bound.to_string(),
                bound: format!("<= 2^{} + 1", self.y_vars.len()),
            });
        }
        self.bound = Some(bound);
        Ok(self)
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn x_vars(&self) -> &[VarId] {
        &self.x_vars
    }

    pub fn y_vars(&self) -> &[VarId] {
        &self.y_vars
    }

    pub fn bound(&self) -> Option<&Count> {
        self.bound.as_ref()
    }
}

/// A chooser assignment together with the number of counted-block models it
/// leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub x_vars: Vec<VarId>,
    pub values: Vec<bool>,
    pub achieved: Count,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, b)) in self.x_vars.iter().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}={}", u8::from(*b))?;
        }
        Ok(())
    }
}

/// Chooser assignment number `rank` in lexicographic order over `len` bits.
fn chooser_values(rank: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| rank >> (len - 1 - i) & 1 == 1).collect()
}

struct Engine<'a> {
    inst: &'a SplitInstance,
    counter: Counter,
    root: NodeId,
}

impl<'a> Engine<'a> {
    fn new(inst: &'a SplitInstance, limit: usize) -> Result<Engine<'a>> {
        if inst.x_vars.len() > limit.min(63) {
            return Err(Error::LimitExceeded {
                scope: inst.x_vars.len(),
                limit: limit.min(63),
            });
        }
        let mut counter = Counter::new();
        let root = counter.import(inst.formula.root());
        Ok(Engine {
            inst,
            counter,
            root,
        })
    }

    fn count_given(&mut self, values: &[bool]) -> Count {
        let mut node = self.root;
        for (v, &b) in self.inst.x_vars.iter().zip(values) {
            node = self.counter.restrict(node, v.index(), b);
        }
        self.counter.count_over(node, self.inst.y_vars.len())
    }

    fn witness(&self, values: Vec<bool>, achieved: Count) -> Witness {
        Witness {
            x_vars: self.inst.x_vars.clone(),
            values,
            achieved,
        }
    }

    fn chooser_space(&self) -> u64 {
        1u64 << self.inst.x_vars.len()
    }
}

/// `#{y : F(x, y)}` for the chooser assignment `values` (aligned with `x_vars`).
pub fn count_given_x(inst: &SplitInstance, values: &[bool]) -> Result<Count> {
    if values.len() != inst.x_vars.len() {
        return Err(Error::ScopeMismatch {
            expected: inst.x_vars.len(),
            found: values.len(),
        });
    }
    let mut engine = Engine::new(inst, usize::MAX)?;
    Ok(engine.count_given(values))
}

fn required_bound(inst: &SplitInstance) -> Result<&Count> {
    inst.bound
        .as_ref()
        .ok_or_else(|| Error::Usage("instance has no bound".into()))
}

/// Least chooser assignment with at least `B` counted models, by enumerating
/// chooser assignments in order.
pub fn dmax_decide(inst: &SplitInstance) -> Result<Option<Witness>> {
    dmax_decide_with_limit(inst, DEFAULT_CHOOSER_LIMIT)
}

pub fn dmax_decide_with_limit(inst: &SplitInstance, limit: usize) -> Result<Option<Witness>> {
    let bound = required_bound(inst)?.clone();
    let mut engine = Engine::new(inst, limit)?;
    for rank in 0..engine.chooser_space() {
        let values = chooser_values(rank, inst.x_vars.len());
        let achieved = engine.count_given(&values);
        if achieved >= bound {
            return Ok(Some(engine.witness(values, achieved)));
        }
    }
    Ok(None)
}

/// Chooser assignment maximizing the counted models; ties go to the least.
pub fn max_count(inst: &SplitInstance) -> Result<Witness> {
    max_count_with_limit(inst, DEFAULT_CHOOSER_LIMIT)
}

pub fn max_count_with_limit(inst: &SplitInstance, limit: usize) -> Result<Witness> {
    let mut engine = Engine::new(inst, limit)?;
    let mut best: Option<(Vec<bool>, Count)> = None;
    for rank in 0..engine.chooser_space() {
        let values = chooser_values(rank, inst.x_vars.len());
        let achieved = engine.count_given(&values);
        if best.as_ref().is_none_or(|(_, b)| &achieved > b) {
            best = Some((values, achieved));
        }
    }
    let (values, achieved) = best.expect("at least one chooser assignment");
    Ok(engine.witness(values, achieved))
}

/// Same contract as [`dmax_decide`], explored depth-first with pruning.
///
/// At each partial chooser assignment the residual formula is counted over
/// every remaining free variable (unassigned choosers and the whole counted
/// block). That total bounds the best completion from above, since the sum
/// over completions is at least their maximum, so subtrees whose total is
/// below `B` are cut.
pub fn dmax_pruned(inst: &SplitInstance) -> Result<Option<Witness>> {
    dmax_pruned_with_limit(inst, DEFAULT_CHOOSER_LIMIT)
}

pub fn dmax_pruned_with_limit(inst: &SplitInstance, limit: usize) -> Result<Option<Witness>> {
    let bound = required_bound(inst)?.clone();
    let mut engine = Engine::new(inst, limit)?;
    let mut values = Vec::with_capacity(inst.x_vars.len());
    let root = engine.root;
    Ok(search(&mut engine, root, &mut values, &bound))
}

fn search(
    engine: &mut Engine<'_>,
    node: NodeId,
    values: &mut Vec<bool>,
    bound: &Count,
) -> Option<Witness> {
    let depth = values.len();
    let x = engine.inst.x_vars.len();
    let free = (x - depth) + engine.inst.y_vars.len();
    if !bound.is_zero() && !engine.counter.at_least_over(node, free, bound) {
        return None;
    }
    if depth == x {
        let achieved = engine.counter.count_over(node, free);
        return Some(engine.witness(values.clone(), achieved));
    }
    let var = engine.inst.x_vars[depth].index();
    for b in [false, true] {
        let child = engine.counter.restrict(node, var, b);
        values.push(b);
        let found = search(engine, child, values, bound);
        values.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Whether some chooser assignment leaves at least `bound` counted models.
pub fn optimum_is_at_least(inst: &SplitInstance, bound: &Count) -> Result<bool> {
    let probe = inst.clone().with_bound(bound.clone())?;
    Ok(dmax_pruned(&probe)?.is_some())
}

/// Largest `B` for which DMAX#SAT answers yes; equals `max_count(..).achieved`.
pub fn max_bound_by_bisection(inst: &SplitInstance) -> Result<Count> {
    let mut lo = Count::zero();
    let mut hi = pow2(inst.y_vars.len());
    while lo < hi {
        let mid: Count = (&lo + &hi + Count::one()) >> 1usize;
        if optimum_is_at_least(inst, &mid)? {
            lo = mid;
        } else {
            hi = mid - Count::one();
        }
    }
    Ok(lo)
}

/// Parses a block declaration such as `x: 1 3 / y: 2 4 5`.
///
/// Variables listed in neither block are counted (`y`); a variable listed
/// twice is an error.
pub fn parse_blocks(formula: Formula, text: &str) -> Result<SplitInstance> {
    let scope = formula.scope();
    let mut x_vars = Vec::new();
    let mut y_vars = Vec::new();
    let mut listed = vec![false; scope as usize];
    for part in text.split('/') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (label, rest) = part
            .split_once(':')
            .ok_or_else(|| Error::Blocks(format!("expected 'x:' or 'y:' in '{part}'")))?;
        let target = match label.trim() {
            "x" => &mut x_vars,
            "y" => &mut y_vars,
            other => return Err(Error::Blocks(format!("unknown block '{other}'"))),
        };
        for word in rest.split_whitespace() {
            let index: u32 = word
                .trim_start_matches('x')
                .parse()
                .map_err(|_| Error::Blocks(format!("invalid variable '{word}'")))?;
            let v = VarId::new(index).map_err(|_| Error::Blocks("variable 0".into()))?;
            if index > scope {
                return Err(Error::Blocks(format!("{v} is outside scope {scope}")));
            }
            if std::mem::replace(&mut listed[v.offset()], true) {
                return Err(Error::Blocks(format!("{v} is listed twice")));
            }
            target.push(v);
        }
    }
    for (i, seen) in listed.iter().enumerate() {
        if !seen {
            y_vars.push(VarId::new(i as u32 + 1).expect("1-based"));
        }
    }
    SplitInstance::new(formula, x_vars, y_vars, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn inst(text: &str, blocks: &str) -> SplitInstance {
        parse_blocks(parse_circuit(text).unwrap(), blocks).unwrap()
    }

    fn c(v: u64) -> Count {
        Count::from(v)
    }

    const OR2: &str = "(scope 2) (or x1 x2)";
    // x1 chooser; y1 = x2, y2 = x3
    const SPLIT3: &str = "(scope 3) (or (and x1 x2) (and (not x1) (and x2 x3)))";

    #[test]
    fn count_given_x_examples() {
        let i = inst(OR2, "x:1 / y:2");
        assert_eq!(count_given_x(&i, &[true]).unwrap(), c(2));
        assert_eq!(count_given_x(&i, &[false]).unwrap(), c(1));

        let i = inst(SPLIT3, "x:1");
        assert_eq!(count_given_x(&i, &[true]).unwrap(), c(2));
        assert_eq!(count_given_x(&i, &[false]).unwrap(), c(1));

        let i = inst("(scope 3) false", "x:1 2");
        assert_eq!(count_given_x(&i, &[true, false]).unwrap(), c(0));
        assert!(count_given_x(&i, &[true]).is_err());
    }

    #[test]
    fn dmax_examples() {
        let i = inst(OR2, "x:1 / y:2").with_bound(c(2)).unwrap();
        let w = dmax_decide(&i).unwrap().unwrap();
        assert_eq!((w.values.as_slice(), &w.achieved), (&[true][..], &c(2)));
        assert_eq!(w.to_string(), "x1=1");

        let i = inst(OR2, "x:1 / y:2").with_bound(c(3)).unwrap();
        assert_eq!(dmax_decide(&i).unwrap(), None);
        assert_eq!(dmax_pruned(&i).unwrap(), None);

        let i = inst(SPLIT3, "x:1").with_bound(c(2)).unwrap();
        let w = dmax_decide(&i).unwrap().unwrap();
        assert_eq!(w.values, vec![true]);
        assert_eq!(dmax_pruned(&i).unwrap(), Some(w));
    }

    #[test]
    fn max_count_examples() {
        let w = max_count(&inst(OR2, "x:1 / y:2")).unwrap();
        assert_eq!((w.values, w.achieved), (vec![true], c(2)));

        let w = max_count(&inst("(scope 5) true", "x:1 2 / y:3 4 5")).unwrap();
        assert_eq!((w.values, w.achieved), (vec![false, false], c(8)));

        let w = max_count(&inst(SPLIT3, "x:1")).unwrap();
        assert_eq!((w.values, w.achieved), (vec![true], c(2)));
    }

    #[test]
    fn pruned_edge_cases() {
        let i = inst(SPLIT3, "x:1").with_bound(c(0)).unwrap();
        let w = dmax_pruned(&i).unwrap().unwrap();
        assert_eq!(w.values, vec![false]);
        assert_eq!(w.achieved, c(1));

        let i = inst("(scope 4) (and x1 (not x1))", "x:1 2").with_bound(c(1)).unwrap();
        assert_eq!(dmax_pruned(&i).unwrap(), None);
    }

    #[test]
    fn lexicographic_order_follows_block_order() {
        // x2 listed first: it is the most significant chooser
        let i = inst("(scope 3) (or x1 x3)", "x: 2 1 / y: 3").with_bound(c(1)).unwrap();
        let w = dmax_decide(&i).unwrap().unwrap();
        assert_eq!(w.to_string(), "x2=0 x1=0");
        assert_eq!(dmax_pruned(&i).unwrap(), Some(w));
        let i = inst("(scope 3) (or x1 x3)", "x: 2 1 / y: 3").with_bound(c(2)).unwrap();
        assert_eq!(dmax_decide(&i).unwrap().unwrap().to_string(), "x2=0 x1=1");
    }

    #[test]
    fn empty_chooser_block() {
        let i = inst(OR2, "y: 1 2").with_bound(c(3)).unwrap();
        let w = dmax_pruned(&i).unwrap().unwrap();
        assert!(w.values.is_empty());
        assert_eq!(w.achieved, c(3));
        assert_eq!(max_count(&i).unwrap().achieved, c(3));
    }

    #[test]
    fn bisection_matches_max() {
        let i = inst(SPLIT3, "x:1");
        assert_eq!(max_bound_by_bisection(&i).unwrap(), c(2));
    }

    #[test]
    fn block_errors() {
        let f = parse_circuit(OR2).unwrap();
        assert!(parse_blocks(f.clone(), "x: 1 / y: 1").is_err());
        assert!(parse_blocks(f.clone(), "x: 3").is_err());
        assert!(parse_blocks(f.clone(), "z: 1").is_err());
        assert!(parse_blocks(f.clone(), "x 1").is_err());
        assert!(parse_blocks(f.clone(), "x: a").is_err());
        let ok = parse_blocks(f.clone(), "").unwrap();
        assert!(ok.x_vars().is_empty());
        assert_eq!(ok.y_vars().len(), 2);
        let v = |i| VarId::new(i).unwrap();
        assert!(SplitInstance::new(f.clone(), vec![v(1)], vec![], None).is_err());
        assert!(SplitInstance::new(f.clone(), vec![v(1)], vec![v(2)], Some(c(4))).is_err());
        assert!(SplitInstance::new(f, vec![v(1)], vec![v(2)], Some(c(3))).is_ok());
    }

    #[test]
    fn missing_bound() {
        assert!(dmax_decide(&inst(OR2, "x:1")).is_err());
    }
}
