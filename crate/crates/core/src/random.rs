//! Seeded random formulas and split instances for differential testing.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Formula, Node, VarId};
use crate::solver::SplitInstance;

/// A random formula over `scope` variables with at most `max_ops` operators.
/// Constants appear occasionally, and always when `scope` is 0.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, scope: u32, max_ops: usize) -> Formula {
    let root = random_node(rng, scope, max_ops);
    Formula::from_parts(root, scope)
}

fn random_node<R: Rng + ?Sized>(rng: &mut R, scope: u32, budget: usize) -> Arc<Node> {
    if budget == 0 || rng.gen_bool(0.2) {
        if scope == 0 || rng.gen_bool(0.08) {
            return Node::constant(rng.gen());
        }
        return Node::var(rng.gen_range(1..=scope));
    }
    let rest = budget - 1;
    match rng.gen_range(0..5) {
        0 => Node::not(random_node(rng, scope, rest)),
        k => {
            let left = rng.gen_range(0..=rest);
            let a = random_node(rng, scope, left);
            let b = random_node(rng, scope, rest - left);
            if k <= 2 {
                Node::and(a, b)
            } else {
                Node::or(a, b)
            }
        }
    }
}

/// A random formula over `1..=max_scope` variables split into a random
/// chooser block (in random order) and the remaining counted block.
pub fn random_split_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_scope: u32,
    max_ops: usize,
) -> SplitInstance {
    let scope = rng.gen_range(1..=max_scope);
    let formula = random_formula(rng, scope, max_ops);
    let mut vars: Vec<VarId> = (1..=scope).map(|i| VarId::new(i).expect("1-based")).collect();
    vars.shuffle(rng);
    let split = rng.gen_range(0..=vars.len());
    let y_vars = vars.split_off(split);
    SplitInstance::new(formula, vars, y_vars, None).expect("partition covers the scope")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_scope_and_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let scope = rng.gen_range(0..6);
            let f = random_formula(&mut rng, scope, 12);
            assert!(f.size() <= 12);
            assert!(f.root().max_var() <= scope);
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_formula(&mut ChaCha8Rng::seed_from_u64(3), 5, 20);
        let b = random_formula(&mut ChaCha8Rng::seed_from_u64(3), 5, 20);
        assert_eq!(a, b);
    }

    #[test]
    fn split_instances_partition_the_scope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let inst = random_split_instance(&mut rng, 8, 10);
            let total = inst.x_vars().len() + inst.y_vars().len();
            assert_eq!(total, inst.formula().scope() as usize);
        }
    }
}
