//! Randomized self-verification of every counting law, checked against the
//! brute-force oracle.
//!
//! Each suite draws its cases from its own seeded stream, so a suite's result
//! depends only on the seed and the budget. A budget caps the number of cases
//! per suite; exhaustive suites stop early when the budget runs out.

use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::count::{count_bruteforce, count_fast, pow2, Count};
use crate::formula::{Assignment, Formula, Node};
use crate::gadgets::{
    k_value, less_than_const, less_than_const_size, pack_many, pack_many_size, pack_pair,
    pack_pair_size, psi_gadget, psi_gadget_size, unpack_digits,
};
use crate::random::{random_formula, random_split_instance};
use crate::reduction::{combine_equalities, eq_to_geq, verify_threshold, Branch, EqualityQuery};
use crate::solver::{count_given_x, dmax_decide, dmax_pruned, max_count, SplitInstance};

/// A deliberate fault injected to check that the suites catch it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// `pack_pair` guards its second branch with the first variable of the
    /// `g` block instead of the selector.
    PackPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub seed: u64,
    pub budget: usize,
    pub mutation: Option<Mutation>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            budget: 1000,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub what: String,
    /// Shrunk operand formulas in circuit format.
    pub formulas: Vec<String>,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.what)?;
        for (i, text) in self.formulas.iter().enumerate() {
            write!(f, "operand {i}:\n{text}")?;
        }
        write!(f, "expected: {}\nactual:   {}", self.expected, self.actual)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failure: Option<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Suite = fn(&Config, &mut ChaCha8Rng) -> (usize, Option<Counterexample>);

pub const SUITES: [(&str, Suite); 9] = [
    ("pair_law", pair_law),
    ("digit_law", digit_law),
    ("threshold_law", threshold_law),
    ("psi_law", psi_law),
    ("apex_law", apex_law),
    ("eq_to_geq", eq_to_geq_exhaustive),
    ("combine", combine_differential),
    ("solver", solver_oracle),
    ("counter", counter_equivalence),
];

pub fn run(config: &Config) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .enumerate()
        .map(|(i, &(name, suite))| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let (cases, failure) = suite(config, &mut rng);
            SuiteReport {
                name,
                cases,
                failure,
            }
        })
        .collect()
}

fn brute(f: &Formula) -> Count {
    count_bruteforce(f).expect("selftest scopes stay under the enumeration limit")
}

/// A law over a list of operand formulas: `Some((expected, actual))` on violation.
type Law<'a> = dyn Fn(&[Formula]) -> Option<(String, String)> + 'a;

/// Checks `law` and, on violation, greedily shrinks each operand while the
/// violation persists.
fn check(what: impl Into<String>, operands: Vec<Formula>, law: &Law<'_>) -> Option<Counterexample> {
    let (mut expected, mut actual) = law(&operands)?;
    let mut current = operands;
    for i in 0..current.len() {
        'shrink: loop {
            let scope = current[i].scope();
            for candidate in simplifications(current[i].root()) {
                let mut trial = current.clone();
                trial[i] = Formula::from_parts(candidate, scope);
                if let Some((e, a)) = law(&trial) {
                    current = trial;
                    (expected, actual) = (e, a);
                    continue 'shrink;
                }
            }
            break;
        }
    }
    Some(Counterexample {
        what: what.into(),
        formulas: current.iter().map(|f| f.to_string()).collect(),
        expected,
        actual,
    })
}

/// Every tree obtained from `node` by replacing one subtree with a constant or
/// with one of its children.
fn simplifications(node: &Arc<Node>) -> Vec<Arc<Node>> {
    let mut out = Vec::new();
    match &**node {
        Node::True => {}
        Node::False => out.push(Node::constant(true)),
        Node::Var(_) => {
            out.push(Node::constant(false));
            out.push(Node::constant(true));
        }
        Node::Not(a) => {
            out.extend([Node::constant(false), Node::constant(true), a.clone()]);
            out.extend(simplifications(a).into_iter().map(Node::not));
        }
        Node::And(a, b) | Node::Or(a, b) => {
            let rebuild = if matches!(**node, Node::And(..)) {
                Node::and
            } else {
                Node::or
            };
            out.extend([Node::constant(false), Node::constant(true), a.clone(), b.clone()]);
            out.extend(simplifications(a).into_iter().map(|s| rebuild(s, b.clone())));
            out.extend(simplifications(b).into_iter().map(|s| rebuild(a.clone(), s)));
        }
    }
    out
}

fn mutated_pack_pair(f: &Formula, g: &Formula) -> Formula {
    let m = f.scope();
    let n = g.scope();
    let selector = m + n + 1;
    let f_branch = Node::conjunction(
        std::iter::once(f.root().clone()).chain((m + 1..=selector).map(|i| Node::not(Node::var(i)))),
    )
    .expect("non-empty");
    let g_branch = Node::and(g.root().shifted(m), Node::var(m + 1));
    Formula::from_parts(Node::or(f_branch, g_branch), selector)
}

fn pair_law(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    let pack: fn(&Formula, &Formula) -> Formula = match config.mutation {
        Some(Mutation::PackPair) => mutated_pack_pair,
        None => pack_pair,
    };
    for case in 0..config.budget {
        // m + n + 1 <= 12
        let m = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=11 - m);
        let f = random_formula(rng, m, 8);
        let g = random_formula(rng, n, 8);
        let law = |ops: &[Formula]| {
            let p = pack(&ops[0], &ops[1]);
            let expected = brute(&ops[0]) + (brute(&ops[1]) << ops[0].scope() as usize);
            let actual = brute(&p);
            if actual != expected {
                return Some((format!("count {expected}"), format!("count {actual}")));
            }
            let size = pack_pair_size(ops[0].size(), ops[1].size(), ops[1].scope());
            (p.size() != size).then(|| (format!("size {size}"), format!("size {}", p.size())))
        };
        if let Some(cx) = check("pack_pair count or size law", vec![f, g], &law) {
            return (case + 1, Some(cx));
        }
    }
    (config.budget, None)
}

fn digit_law(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    for case in 0..config.budget {
        let n = rng.gen_range(1..=3u32);
        let k = rng.gen_range(1..=12 / (n as usize + 1)).min(3);
        let fs: Vec<Formula> = (0..k).map(|_| random_formula(rng, n, 6)).collect();
        let law = |ops: &[Formula]| {
            let packed = pack_many(ops).expect("uniform scopes");
            let expected: Vec<Count> = ops.iter().map(brute).collect();
            let digits = unpack_digits(&brute(&packed.formula), n, k).expect("count fits");
            if digits != expected {
                return Some((format!("digits {expected:?}"), format!("digits {digits:?}")));
            }
            let sizes: Vec<usize> = ops.iter().map(Formula::size).collect();
            let size = pack_many_size(&sizes, n);
            let got = packed.formula.size();
            (got != size).then(|| (format!("size {size}"), format!("size {got}")))
        };
        if let Some(cx) = check("pack_many digit or size law", fs, &law) {
            return (case + 1, Some(cx));
        }
    }
    (config.budget, None)
}

fn threshold_law(config: &Config, _rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    let mut cases = 0;
    for n in 0..=6u32 {
        for c in 0..=1u64 << n {
            if cases == config.budget {
                return (cases, None);
            }
            cases += 1;
            let c = Count::from(c);
            let m = less_than_const(n, &c).expect("c <= 2^n");
            let actual = brute(&m);
            let size_ok = m.size() <= 3 * n as usize && m.size() == less_than_const_size(n, &c);
            if actual != c || !size_ok {
                return (
                    cases,
                    Some(Counterexample {
                        what: format!("less_than_const({n}, {c})"),
                        formulas: vec![m.to_string()],
                        expected: format!("count {c}, size <= {}", 3 * n),
                        actual: format!("count {actual}, size {}", m.size()),
                    }),
                );
            }
        }
    }
    (cases, None)
}

fn psi_law(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    for case in 0..config.budget {
        let n = rng.gen_range(1..=5u32);
        let f = random_formula(rng, n, 8);
        let max_delta = 1u64 << (n - 1);
        for delta in 0..=max_delta {
            let delta = Count::from(delta);
            let law = |ops: &[Formula]| {
                let g = psi_gadget(&ops[0], &delta).expect("delta in range");
                let expected = k_value(n, &delta, &brute(&ops[0])).expect("in range");
                let actual = brute(&g);
                if actual != expected {
                    return Some((format!("count {expected}"), format!("count {actual}")));
                }
                let size = psi_gadget_size(ops[0].size(), n, &delta);
                (g.size() != size).then(|| (format!("size {size}"), format!("size {}", g.size())))
            };
            if let Some(cx) = check(format!("psi gadget law, delta {delta}"), vec![f.clone()], &law) {
                return (case + 1, Some(cx));
            }
        }
    }
    (config.budget, None)
}

fn apex_law(config: &Config, _rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    let mut cases = 0;
    for n in 1..=5u32 {
        for delta in 0..=1u64 << (n - 1) {
            let delta = Count::from(delta);
            let apex_x = pow2(n as usize - 1) + &delta;
            let apex = k_value(n, &delta, &apex_x).expect("in range");
            for x in 0..=1u64 << n {
                if cases == config.budget {
                    return (cases, None);
                }
                cases += 1;
                let x = Count::from(x);
                let value = k_value(n, &delta, &x).expect("in range");
                if (value >= apex) != (x == apex_x) {
                    return (
                        cases,
                        Some(Counterexample {
                            what: format!("apex law n={n} delta={delta} x={x}"),
                            formulas: vec![],
                            expected: format!("K(x) >= {apex} iff x = {apex_x}"),
                            actual: format!("K(x) = {value}"),
                        }),
                    );
                }
            }
        }
    }
    (cases, None)
}

fn eq_to_geq_exhaustive(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    for case in 0..config.budget {
        let n = rng.gen_range(1..=4u32);
        let h = random_formula(rng, n, 8);
        for y in 0..=1u64 << n {
            let y = Count::from(y);
            let law = |ops: &[Formula]| {
                let r = eq_to_geq(&ops[0], &y).expect("y in range");
                let truth = brute(&ops[0]) == y;
                let gadget_count = brute(&r.query.formula);
                let oracle = gadget_count >= r.query.bound;
                let fast = verify_threshold(&r.query);
                if oracle != truth || fast != truth || gadget_count > r.query.bound {
                    return Some((
                        format!("holds={truth}, count <= {}", r.query.bound),
                        format!("oracle={oracle} fast={fast} count={gadget_count}"),
                    ));
                }
                let operand_size = ops[0].size() + usize::from(r.branch == Branch::Negated);
                let size = psi_gadget_size(operand_size, n, &r.delta);
                let got = r.query.formula.size();
                (got != size).then(|| (format!("size {size}"), format!("size {got}")))
            };
            if let Some(cx) = check(format!("eq_to_geq, y = {y}"), vec![h.clone()], &law) {
                return (case + 1, Some(cx));
            }
        }
    }
    (config.budget, None)
}

/// The true claim vector and every vector differing from it in one digit.
pub fn claim_vectors(truth: &[Count], n: u32) -> Vec<Vec<Count>> {
    let mut out = vec![truth.to_vec()];
    for i in 0..truth.len() {
        for alt in 0..=1u64 << n {
            let alt = Count::from(alt);
            if alt != truth[i] {
                let mut v = truth.to_vec();
                v[i] = alt;
                out.push(v);
            }
        }
    }
    out
}

fn combine_differential(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    for case in 0..config.budget {
        let n = rng.gen_range(1..=2u32);
        let k = rng.gen_range(1..=2usize);
        let fs: Vec<Formula> = (0..k).map(|_| random_formula(rng, n, 6)).collect();
        let truth: Vec<Count> = fs.iter().map(brute).collect();
        for claims in claim_vectors(&truth, n) {
            let law = |ops: &[Formula]| {
                let qs: Vec<EqualityQuery> = ops
                    .iter()
                    .zip(&claims)
                    .map(|(f, c)| EqualityQuery::new(f.clone(), c.clone()).expect("claim <= 2^n"))
                    .collect();
                let combined = combine_equalities(&qs).expect("valid queries");
                let q = combined.query();
                let holds = ops.iter().zip(&claims).all(|(f, c)| &brute(f) == c);
                let oracle = brute(&q.formula) >= q.bound;
                let fast = verify_threshold(q);
                (oracle != holds || fast != holds).then(|| {
                    (
                        format!("answer {holds}"),
                        format!("oracle={oracle} fast={fast}"),
                    )
                })
            };
            let what = format!("combine_equalities, claims {claims:?}");
            if let Some(cx) = check(what, fs.clone(), &law) {
                return (case + 1, Some(cx));
            }
        }
    }
    (config.budget, None)
}

/// Counted models for every chooser assignment, by direct evaluation.
pub fn exhaustive_chooser_counts(inst: &SplitInstance) -> Vec<Count> {
    let f = inst.formula();
    let (xs, ys) = (inst.x_vars(), inst.y_vars());
    (0..1u64 << xs.len())
        .map(|rank| {
            let mut models = 0u64;
            for ymask in 0..1u64 << ys.len() {
                let mut bits = vec![false; f.scope() as usize];
                for (i, v) in xs.iter().enumerate() {
                    bits[v.offset()] = rank >> (xs.len() - 1 - i) & 1 == 1;
                }
                for (j, v) in ys.iter().enumerate() {
                    bits[v.offset()] = ymask >> j & 1 == 1;
                }
                if f.evaluate(&Assignment::new(bits)).expect("full assignment") {
                    models += 1;
                }
            }
            Count::from(models)
        })
        .collect()
}

fn solver_oracle(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    for case in 0..config.budget {
        let inst = random_split_instance(rng, 10, 10);
        let fail = |what: String, expected: String, actual: String| {
            Some(Counterexample {
                what: format!(
                    "{what} (x = {:?}, y = {:?})",
                    inst.x_vars().iter().map(|v| v.index()).collect::<Vec<_>>(),
                    inst.y_vars().iter().map(|v| v.index()).collect::<Vec<_>>()
                ),
                formulas: vec![inst.formula().to_string()],
                expected,
                actual,
            })
        };
        let table = exhaustive_chooser_counts(&inst);
        let best = table.iter().max().expect("non-empty").clone();
        let best_rank = table.iter().position(|c| c == &best).expect("present");
        let w = max_count(&inst).expect("within limits");
        let rank = w.values.iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b));
        if w.achieved != best || rank != best_rank {
            let got = format!("rank {rank} count {}", w.achieved);
            return (case + 1, fail("max_count".into(), format!("rank {best_rank} count {best}"), got));
        }
        let random_bound = Count::from(rng.gen_range(0..=(1u64 << inst.y_vars().len()) + 1));
        for bound in [Count::zero(), best.clone(), &best + 1u32, random_bound] {
            let probe = inst.clone().with_bound(bound.clone()).expect("bound <= 2^|y| + 1");
            let plain = dmax_decide(&probe).expect("within limits");
            let pruned = dmax_pruned(&probe).expect("within limits");
            let expected_rank = table.iter().position(|c| c >= &bound);
            let plain_rank = plain
                .as_ref()
                .map(|w| w.values.iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b)));
            let valid = plain.as_ref().is_none_or(|w| {
                w.achieved >= bound && count_given_x(&inst, &w.values).ok() == Some(w.achieved.clone())
            });
            if plain != pruned || plain_rank != expected_rank || !valid {
                return (
                    case + 1,
                    fail(
                        format!("dmax with bound {bound}"),
                        format!("rank {expected_rank:?}"),
                        format!("plain {plain_rank:?}, pruned {:?}", pruned.map(|w| w.to_string())),
                    ),
                );
            }
        }
    }
    (config.budget, None)
}

fn counter_equivalence(config: &Config, rng: &mut ChaCha8Rng) -> (usize, Option<Counterexample>) {
    for case in 0..config.budget {
        let scope = rng.gen_range(0..=10u32);
        let f = random_formula(rng, scope, 14);
        let law = |ops: &[Formula]| {
            let (expected, actual) = (brute(&ops[0]), count_fast(&ops[0]));
            (expected != actual).then(|| (expected.to_string(), actual.to_string()))
        };
        if let Some(cx) = check("count_fast vs brute force", vec![f], &law) {
            return (case + 1, Some(cx));
        }
    }
    (config.budget, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_budget_is_vacuous() {
        let reports = run(&Config {
            seed: 1,
            budget: 0,
            mutation: None,
        });
        assert_eq!(reports.len(), SUITES.len());
        assert!(reports.iter().all(|r| r.cases == 0 && r.passed()));
    }

    #[test]
    fn small_budget_passes() {
        let reports = run(&Config {
            seed: 42,
            budget: 15,
            mutation: None,
        });
        for r in &reports {
            assert!(r.passed(), "{}: {}", r.name, r.failure.as_ref().unwrap());
            assert_eq!(r.cases, 15);
        }
    }

    #[test]
    fn mutation_is_caught_and_shrunk() {
        let reports = run(&Config {
            seed: 42,
            budget: 50,
            mutation: Some(Mutation::PackPair),
        });
        let pair = &reports[0];
        assert_eq!(pair.name, "pair_law");
        let cx = pair.failure.as_ref().expect("mutation must be detected");
        // shrinking leaves no operand larger than a handful of operators
        assert!(cx.formulas.iter().all(|t| t.len() < 60), "{cx}");
        assert!(reports[1..].iter().all(SuiteReport::passed));
    }

    #[test]
    fn claim_vectors_cover_single_digit_changes() {
        let truth = [Count::from(1u32), Count::from(3u32)];
        let vs = claim_vectors(&truth, 2);
        // truth + 4 alternatives per digit
        assert_eq!(vs.len(), 9);
        assert_eq!(vs[0], truth.to_vec());
        assert!(vs[1..].iter().all(|v| v.iter().zip(&truth).filter(|(a, b)| a != b).count() == 1));
    }

    #[test]
    fn shrinking_reaches_a_small_witness() {
        let f = random_formula(&mut ChaCha8Rng::seed_from_u64(5), 4, 20);
        // "is satisfiable" shrinks down to the constant true
        let law = |ops: &[Formula]| {
            let c = brute(&ops[0]);
            (c > Count::zero()).then(|| ("unsat".to_string(), c.to_string()))
        };
        if let Some(cx) = check("sat", vec![f], &law) {
            assert_eq!(cx.formulas[0], "(scope 4)\ntrue\n");
        }
    }
}
