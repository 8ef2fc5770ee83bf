//! Exact model counting over a formula's declared scope.
//!
//! [`count_bruteforce`] enumerates every assignment and is the ground truth
//! the rest of the crate is checked against. [`Counter`] is the fast path: a
//! hash-consed circuit DAG with constant propagation, counted by splitting on
//! the lowest-indexed variable and memoizing the count of every residual
//! sub-circuit. Conjunctions and disjunctions whose operands share no variable
//! are counted as independent components.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formula::{Formula, Node, VarId};

/// An arbitrary-precision model count.
pub type Count = BigUint;

/// Default number of variables the brute-force oracle is willing to enumerate.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// `2^k` as a count.
pub fn pow2(k: usize) -> Count {
    Count::one() << k
}

/// Counts models by enumerating all `2^scope` assignments.
pub fn count_bruteforce(f: &Formula) -> Result<Count> {
    count_bruteforce_with_limit(f, DEFAULT_ENUMERATION_LIMIT)
}

pub fn count_bruteforce_with_limit(f: &Formula, limit: usize) -> Result<Count> {
    let scope = f.scope() as usize;
    // masks are u64
    if scope > limit.min(63) {
        return Err(Error::LimitExceeded {
            scope,
            limit: limit.min(63),
        });
    }
    let root = f.root();
    let mut models: u64 = 0;
    for mask in 0..1u64 << scope {
        if root.eval_with(&|v: VarId| mask >> v.offset() & 1 == 1) {
            models += 1;
        }
    }
    Ok(Count::from(models))
}

/// Counts models with the fast engine.
pub fn count_fast(f: &Formula) -> Count {
    let mut counter = Counter::new();
    let root = counter.import(f.root());
    counter.count_over(root, f.scope() as usize)
}

/// Returns whether `#f >= bound`, stopping the search once it is decided.
pub fn threshold_check(f: &Formula, bound: &Count) -> bool {
    let mut counter = Counter::new();
    let root = counter.import(f.root());
    counter.at_least_over(root, f.scope() as usize, bound)
}

/// Handle to a node of a [`Counter`] DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Gate {
    Const(bool),
    Var(u32),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
}

const FALSE: NodeId = NodeId(0);
const TRUE: NodeId = NodeId(1);

/// Hash-consed circuit store with a memoized counting engine.
///
/// Counts returned by [`Counter::count`] are over the node's own support
/// (the variables still occurring in it); callers scale by `2^k` for the
/// `k` scope variables the residual no longer mentions.
pub struct Counter {
    gates: Vec<Gate>,
    support: Vec<Arc<[u32]>>,
    unique: HashMap<Gate, NodeId>,
    counts: HashMap<NodeId, Count>,
}

impl Default for Counter {
    fn default() -> Self {
        Self::new()
    }
}

impl Counter {
    pub fn new() -> Counter {
        let mut c = Counter {
            gates: Vec::new(),
            support: Vec::new(),
            unique: HashMap::new(),
            counts: HashMap::new(),
        };
        c.intern(Gate::Const(false), Arc::from([]));
        c.intern(Gate::Const(true), Arc::from([]));
        c
    }

    fn intern(&mut self, gate: Gate, support: Arc<[u32]>) -> NodeId {
        if let Some(&id) = self.unique.get(&gate) {
            return id;
        }
        let id = NodeId(self.gates.len() as u32);
        self.gates.push(gate);
        self.support.push(support);
        self.unique.insert(gate, id);
        id
    }

    /// Number of distinct nodes created so far.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sorted variable indices the node depends on syntactically.
    pub fn support(&self, id: NodeId) -> &[u32] {
        &self.support[id.0 as usize]
    }

    pub fn constant(&self, value: bool) -> NodeId {
        if value {
            TRUE
        } else {
            FALSE
        }
    }

    pub fn as_const(&self, id: NodeId) -> Option<bool> {
        match self.gates[id.0 as usize] {
            Gate::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn var(&mut self, index: u32) -> NodeId {
        self.intern(Gate::Var(index), Arc::from([index]))
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        match self.gates[a.0 as usize] {
            Gate::Const(b) => self.constant(!b),
            Gate::Not(inner) => inner,
            _ => {
                let s = self.support[a.0 as usize].clone();
                self.intern(Gate::Not(a), s)
            }
        }
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.as_const(a), self.as_const(b)) {
            (Some(false), _) | (_, Some(false)) => FALSE,
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ if a == b => a,
            _ => {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                let s = self.merged_support(a, b);
                self.intern(Gate::And(a, b), s)
            }
        }
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.as_const(a), self.as_const(b)) {
            (Some(true), _) | (_, Some(true)) => TRUE,
            (Some(false), _) => b,
            (_, Some(false)) => a,
            _ if a == b => a,
            _ => {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                let s = self.merged_support(a, b);
                self.intern(Gate::Or(a, b), s)
            }
        }
    }

    fn merged_support(&self, a: NodeId, b: NodeId) -> Arc<[u32]> {
        let (x, y) = (self.support(a), self.support(b));
        let mut out = Vec::with_capacity(x.len() + y.len());
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => {
                    out.push(x[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(y[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(x[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&x[i..]);
        out.extend_from_slice(&y[j..]);
        out.into()
    }

    fn disjoint(&self, a: NodeId, b: NodeId) -> bool {
        let (x, y) = (self.support(a), self.support(b));
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Imports a formula tree, sharing identical subtrees.
    pub fn import(&mut self, root: &Arc<Node>) -> NodeId {
        let mut seen = HashMap::new();
        self.import_rec(root, &mut seen)
    }

    fn import_rec(&mut self, node: &Arc<Node>, seen: &mut HashMap<*const Node, NodeId>) -> NodeId {
        let key = Arc::as_ptr(node);
        if let Some(&id) = seen.get(&key) {
            return id;
        }
        let id = match &**node {
            Node::True => TRUE,
            Node::False => FALSE,
            Node::Var(v) => self.var(v.index()),
            Node::Not(a) => {
                let a = self.import_rec(a, seen);
                self.not(a)
            }
            Node::And(a, b) => {
                let a = self.import_rec(a, seen);
                let b = self.import_rec(b, seen);
                self.and(a, b)
            }
            Node::Or(a, b) => {
                let a = self.import_rec(a, seen);
                let b = self.import_rec(b, seen);
                self.or(a, b)
            }
        };
        seen.insert(key, id);
        id
    }

    /// Substitutes `value` for variable `var` and propagates constants.
    pub fn restrict(&mut self, id: NodeId, var: u32, value: bool) -> NodeId {
        let mut memo = HashMap::new();
        self.restrict_rec(id, var, value, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        id: NodeId,
        var: u32,
        value: bool,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> NodeId {
        if self.support(id).binary_search(&var).is_err() {
            return id;
        }
        if let Some(&r) = memo.get(&id) {
            return r;
        }
        let r = match self.gates[id.0 as usize] {
            Gate::Const(_) => id,
            Gate::Var(_) => self.constant(value),
            Gate::Not(a) => {
                let a = self.restrict_rec(a, var, value, memo);
                self.not(a)
            }
            Gate::And(a, b) => {
                let a = self.restrict_rec(a, var, value, memo);
                if a == FALSE {
                    FALSE
                } else {
                    let b = self.restrict_rec(b, var, value, memo);
                    self.and(a, b)
                }
            }
            Gate::Or(a, b) => {
                let a = self.restrict_rec(a, var, value, memo);
                if a == TRUE {
                    TRUE
                } else {
                    let b = self.restrict_rec(b, var, value, memo);
                    self.or(a, b)
                }
            }
        };
        memo.insert(id, r);
        r
    }

    /// Models of `id` over its own support.
    pub fn count(&mut self, id: NodeId) -> Count {
        self.count_capped(id, None)
    }

    /// Models of `id` over a block of `width` variables containing its support.
    pub fn count_over(&mut self, id: NodeId, width: usize) -> Count {
        let free = width - self.support(id).len();
        self.count(id) << free
    }

    /// Whether `id` has at least `bound` models over a block of `width`
    /// variables containing its support.
    pub fn at_least_over(&mut self, id: NodeId, width: usize, bound: &Count) -> bool {
        if bound.is_zero() {
            return true;
        }
        let free = width - self.support(id).len();
        // #id · 2^free >= bound  <=>  #id >= ceil(bound / 2^free)
        let need = bound.div_ceil(&pow2(free));
        self.count_capped(id, Some(&need)) >= need
    }

    /// Exact count when it is below `cap`; otherwise some value `>= cap`.
    /// Only exact values enter the memo table.
    fn count_capped(&mut self, id: NodeId, cap: Option<&Count>) -> Count {
        if cap.is_some_and(Zero::is_zero) {
            return Count::zero();
        }
        if let Some(c) = self.counts.get(&id) {
            return c.clone();
        }
        let gate = self.gates[id.0 as usize];
        let c = match gate {
            Gate::Const(b) => {
                if b {
                    Count::one()
                } else {
                    Count::zero()
                }
            }
            Gate::Var(_) => Count::one(),
            Gate::Not(a) => {
                let width = self.support(a).len();
                pow2(width) - self.count(a)
            }
            Gate::And(a, b) if self.disjoint(a, b) => self.count(a) * self.count(b),
            Gate::Or(a, b) if self.disjoint(a, b) => {
                let (wa, wb) = (self.support(a).len(), self.support(b).len());
                let miss_a = pow2(wa) - self.count(a);
                let miss_b = pow2(wb) - self.count(b);
                pow2(wa + wb) - miss_a * miss_b
            }
            Gate::And(..) | Gate::Or(..) => {
                let width = self.support(id).len();
                let var = self.support(id)[0];
                let mut total = Count::zero();
                for value in [false, true] {
                    let branch = self.restrict(id, var, value);
                    let gap = width - 1 - self.support(branch).len();
                    let rest = cap.map(|c| {
                        if &total >= c {
                            Count::zero()
                        } else {
                            (c - &total).div_ceil(&pow2(gap))
                        }
                    });
                    total += self.count_capped(branch, rest.as_ref()) << gap;
                    if let Some(c) = cap {
                        if &total >= c {
                            return total;
                        }
                    }
                }
                total
            }
        };
        self.counts.insert(id, c.clone());
        c
    }
}
