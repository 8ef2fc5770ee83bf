//! Propositional formulas over an explicitly declared block of variables.
//!
//! A [`Formula`] is an immutable operator tree paired with its scope `n`, the
//! number of variables `x1..xn` it is counted over. The scope is part of the
//! value: two formulas with the same tree but different scopes have different
//! model counts, since every unused scope variable doubles the count.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A 1-based propositional variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(u32);

impl VarId {
    pub fn new(index: u32) -> Result<VarId> {
        if index == 0 {
            Err(Error::ZeroVariable)
        } else {
            Ok(VarId(index))
        }
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Position of this variable in a 0-based assignment vector.
    pub fn offset(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// One node of a formula tree. Children are shared, so cloning is cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    Var(VarId),
    Not(Arc<Node>),
    And(Arc<Node>, Arc<Node>),
    Or(Arc<Node>, Arc<Node>),
}

impl Node {
    /// Panics on index 0; use [`VarId::new`] for untrusted input.
    pub fn var(index: u32) -> Arc<Node> {
        Arc::new(Node::Var(VarId::new(index).expect("variable index 0")))
    }

    pub fn constant(value: bool) -> Arc<Node> {
        Arc::new(if value { Node::True } else { Node::False })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: Arc<Node>) -> Arc<Node> {
        Arc::new(Node::Not(child))
    }

    pub fn and(left: Arc<Node>, right: Arc<Node>) -> Arc<Node> {
        Arc::new(Node::And(left, right))
    }

    pub fn or(left: Arc<Node>, right: Arc<Node>) -> Arc<Node> {
        Arc::new(Node::Or(left, right))
    }

    /// Right-folded conjunction `a0 ∧ (a1 ∧ (… ∧ ak))`. `None` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Arc<Node>>) -> Option<Arc<Node>> {
        fold_right(items, Node::and)
    }

    /// Right-folded disjunction. `None` when empty.
    pub fn disjunction(items: impl IntoIterator<Item = Arc<Node>>) -> Option<Arc<Node>> {
        fold_right(items, Node::or)
    }

    /// Number of Not/And/Or nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match self {
            Node::True | Node::False | Node::Var(_) => 0,
            Node::Not(a) => 1 + a.size(),
            Node::And(a, b) | Node::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Largest variable index occurring in the tree, 0 if none.
    pub fn max_var(&self) -> u32 {
        match self {
            Node::True | Node::False => 0,
            Node::Var(v) => v.index(),
            Node::Not(a) => a.max_var(),
            Node::And(a, b) | Node::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Evaluates the tree with `value(v)` giving the value of each variable.
    pub fn eval_with(&self, value: &impl Fn(VarId) -> bool) -> bool {
        match self {
            Node::True => true,
            Node::False => false,
            Node::Var(v) => value(*v),
            Node::Not(a) => !a.eval_with(value),
            Node::And(a, b) => a.eval_with(value) && b.eval_with(value),
            Node::Or(a, b) => a.eval_with(value) || b.eval_with(value),
        }
    }

    /// Relocates every variable by `offset`.
    pub fn shifted(self: &Arc<Node>, offset: u32) -> Arc<Node> {
        if offset == 0 {
            return self.clone();
        }
        match &**self {
            Node::True | Node::False => self.clone(),
            Node::Var(v) => Arc::new(Node::Var(VarId(v.index() + offset))),
            Node::Not(a) => Node::not(a.shifted(offset)),
            Node::And(a, b) => Node::and(a.shifted(offset), b.shifted(offset)),
            Node::Or(a, b) => Node::or(a.shifted(offset), b.shifted(offset)),
        }
    }
}

fn fold_right(
    items: impl IntoIterator<Item = Arc<Node>>,
    op: fn(Arc<Node>, Arc<Node>) -> Arc<Node>,
) -> Option<Arc<Node>> {
    let items: Vec<_> = items.into_iter().collect();
    let mut iter = items.into_iter().rev();
    let last = iter.next()?;
    Some(iter.fold(last, |acc, item| op(item, acc)))
}

/// A formula tree together with its declared scope.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    root: Arc<Node>,
    scope: u32,
}

impl Formula {
    /// Checks that every variable of `root` lies within `scope`.
    pub fn new(root: Arc<Node>, scope: u32) -> Result<Formula> {
        let max = root.max_var();
        if max > scope {
            return Err(Error::VarOutOfScope { var: max, scope });
        }
        Ok(Formula { root, scope })
    }

    /// Caller guarantees the scope invariant.
    pub(crate) fn from_parts(root: Arc<Node>, scope: u32) -> Formula {
        debug_assert!(root.max_var() <= scope);
        Formula { root, scope }
    }

    pub fn constant(value: bool, scope: u32) -> Formula {
        Formula::from_parts(Node::constant(value), scope)
    }

    /// The single variable `x_index` over `scope` variables.
    pub fn var(index: u32, scope: u32) -> Result<Formula> {
        let v = VarId::new(index)?;
        Formula::new(Arc::new(Node::Var(v)), scope)
    }

    pub fn root(&self) -> &Arc<Node> {
        &self.root
    }

    pub fn scope(&self) -> u32 {
        self.scope
    }

    /// Number of Boolean operators (Not, And, Or nodes).
    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn not(&self) -> Formula {
        Formula::from_parts(Node::not(self.root.clone()), self.scope)
    }

    /// Conjunction over the larger of the two scopes.
    pub fn and(&self, other: &Formula) -> Formula {
        Formula::from_parts(
            Node::and(self.root.clone(), other.root.clone()),
            self.scope.max(other.scope),
        )
    }

    /// Disjunction over the larger of the two scopes.
    pub fn or(&self, other: &Formula) -> Formula {
        Formula::from_parts(
            Node::or(self.root.clone(), other.root.clone()),
            self.scope.max(other.scope),
        )
    }

    /// Same tree over a different scope; fails if a variable would fall outside.
    pub fn with_scope(&self, scope: u32) -> Result<Formula> {
        Formula::new(self.root.clone(), scope)
    }

    /// Relocates `x_i` to `x_{i+offset}` and widens the scope by `offset`.
    ///
    /// Only indices move; the freed low block is unconstrained, so the model
    /// count over the new scope is `#f · 2^offset`.
    pub fn shift(&self, offset: u32) -> Formula {
        Formula::from_parts(self.root.shifted(offset), self.scope + offset)
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        if assignment.len() != self.scope as usize {
            return Err(Error::ScopeMismatch {
                expected: self.scope as usize,
                found: assignment.len(),
            });
        }
        Ok(self.root.eval_with(&|v| assignment.value(v)))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::circuit::print_circuit(self))
    }
}

/// Values of variables `x1..xn`, stored at offsets `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Assignment {
        Assignment(bits)
    }

    /// Bit `i` of `mask` becomes the value of `x_{i+1}`.
    pub fn from_mask(mask: u64, len: usize) -> Assignment {
        Assignment((0..len).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Panics when `v` lies outside the assignment.
    pub fn value(&self, v: VarId) -> bool {
        self.0[v.offset()]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u32) -> Arc<Node> {
        Node::var(i)
    }

    #[test]
    fn evaluate_examples() {
        let f = Formula::new(Node::and(x(1), x(2)), 2).unwrap();
        assert!(f.evaluate(&vec![true, true].into()).unwrap());

        let f = Formula::new(Node::and(x(1), Node::not(x(1))), 1).unwrap();
        assert!(!f.evaluate(&vec![true].into()).unwrap());

        let f = Formula::new(Node::or(x(1), x(2)), 3).unwrap();
        assert!(f.evaluate(&vec![false, true, false].into()).unwrap());
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let f = Formula::new(x(1), 2).unwrap();
        assert_eq!(
            f.evaluate(&vec![true].into()),
            Err(Error::ScopeMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn size_examples() {
        assert_eq!(Formula::var(1, 1).unwrap().size(), 0);
        assert_eq!(Formula::new(Node::not(x(1)), 1).unwrap().size(), 1);
        let f = Node::and(Node::or(x(1), Node::not(x(2))), x(3));
        assert_eq!(Formula::new(f, 3).unwrap().size(), 3);
    }

    #[test]
    fn shift_examples() {
        let f = Formula::var(1, 1).unwrap().shift(2);
        assert_eq!(f, Formula::var(3, 3).unwrap());

        let g = Formula::new(Node::or(x(1), x(2)), 2).unwrap();
        assert_eq!(g.shift(0), g);

        let h = Formula::new(Node::not(x(2)), 2).unwrap().shift(3);
        assert_eq!(h, Formula::new(Node::not(x(5)), 5).unwrap());
    }

    #[test]
    fn scope_is_checked() {
        assert_eq!(
            Formula::new(x(3), 2),
            Err(Error::VarOutOfScope { var: 3, scope: 2 })
        );
        assert_eq!(VarId::new(0), Err(Error::ZeroVariable));
        assert!(Formula::var(2, 2).unwrap().with_scope(1).is_err());
    }

    #[test]
    fn folds_are_right_nested() {
        let c = Node::conjunction([x(1), x(2), x(3)]).unwrap();
        assert_eq!(c, Node::and(x(1), Node::and(x(2), x(3))));
        assert_eq!(Node::disjunction([x(4)]).unwrap(), x(4));
        assert!(Node::conjunction([]).is_none());
    }

    #[test]
    fn composition_sizes_add_up() {
        let f = Formula::new(Node::or(x(1), Node::not(x(2))), 2).unwrap();
        let g = Formula::new(Node::not(x(3)), 3).unwrap();
        assert_eq!(f.and(&g).size(), f.size() + g.size() + 1);
        assert_eq!(f.or(&g).size(), f.size() + g.size() + 1);
        assert_eq!(f.not().size(), f.size() + 1);
        assert_eq!(f.and(&g).scope(), 3);
    }
}
