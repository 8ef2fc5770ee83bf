//! Collapsing count-equality claims into a single count-threshold query.
//!
//! A list of claims `#Fᵢ = Cᵢ` is packed into one claim `#Φ = Y` with
//! [`pack_many`], and that equality is turned into `#G ≥ B` with the ψ
//! gadget. Every intermediate value is kept for auditing.

use num_traits::Zero;
use serde_json::json;

use crate::count::{pow2, threshold_check, Count};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::gadgets::{k_value, pack_digits, pack_many, psi_gadget, PackedFormula};

/// The claim `#formula = claimed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityQuery {
    pub formula: Formula,
    pub claimed: Count,
}

impl EqualityQuery {
    pub fn new(formula: Formula, claimed: Count) -> Result<EqualityQuery> {
        let cap = pow2(formula.scope() as usize);
        if claimed > cap {
            return Err(Error::Range {
                what: "claimed count",
                value: claimed.to_string(),
                bound: format!("<= 2^{}", formula.scope()),
            });
        }
        Ok(EqualityQuery { formula, claimed })
    }
}

/// The test `#formula >= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdQuery {
    pub formula: Formula,
    pub bound: Count,
}

impl ThresholdQuery {
    /// A bound of `2^scope + 1` is allowed and is never met.
    pub fn new(formula: Formula, bound: Count) -> Result<ThresholdQuery> {
        let cap = pow2(formula.scope() as usize) + 1u32;
        if bound > cap {
            return Err(Error::Range {
                what: "bound",
                value: bound.to_string(),
                bound: format!("<= 2^{} + 1", formula.scope()),
            });
        }
        Ok(ThresholdQuery { formula, bound })
    }
}

/// Which side of `2^(n−1)` the target count fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `Y = 2^(n−1) + Δ`; the gadget is built over `h`.
    Direct,
    /// `Y = 2^(n−1) − Δ`; the gadget is built over `¬h`.
    Negated,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Direct => "direct",
            Branch::Negated => "negated",
        }
    }
}

/// Result of [`eq_to_geq`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqToGeq {
    pub query: ThresholdQuery,
    pub scope: u32,
    pub target: Count,
    pub delta: Count,
    pub branch: Branch,
}

impl EqToGeq {
    pub fn audit(&self) -> serde_json::Value {
        json!({
            "step": "eq_to_geq",
            "n": self.scope,
            "y": self.target.to_string(),
            "branch": self.branch.as_str(),
            "delta": self.delta.to_string(),
            "bound": self.query.bound.to_string(),
            "scope": self.query.formula.scope(),
            "size": self.query.formula.size(),
        })
    }
}

/// Turns `#h = y` into `#G >= B`.
///
/// With `n` the scope of `h`: if `y >= 2^(n−1)` then `Δ = y − 2^(n−1)` and
/// `G = ψ(h, Δ)`; otherwise `Δ = 2^(n−1) − y` and `G = ψ(¬h, Δ)`, whose target
/// is `2^n − y`. Either way `B` is the apex value of the parabola, so
/// `#G <= B` always and equality holds exactly when `#h = y`.
pub fn eq_to_geq(h: &Formula, y: &Count) -> Result<EqToGeq> {
    let n = h.scope();
    if n == 0 {
        return Err(Error::Range {
            what: "scope",
            value: "0".into(),
            bound: ">= 1".into(),
        });
    }
    let full = pow2(n as usize);
    if y > &full {
        return Err(Error::Range {
            what: "y",
            value: y.to_string(),
            bound: format!("<= 2^{n}"),
        });
    }
    let half = pow2(n as usize - 1);
    let (operand, delta, branch, apex) = if y >= &half {
        (h.clone(), y - &half, Branch::Direct, y.clone())
    } else {
        (h.not(), &half - y, Branch::Negated, &full - y)
    };
    let formula = psi_gadget(&operand, &delta)?;
    let bound = k_value(n, &delta, &apex)?;
    Ok(EqToGeq {
        query: ThresholdQuery { formula, bound },
        scope: n,
        target: y.clone(),
        delta,
        branch,
    })
}

/// Result of [`combine_equalities`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combined {
    pub packed: PackedFormula,
    pub digits: Vec<Count>,
    pub step: EqToGeq,
}

impl Combined {
    pub fn query(&self) -> &ThresholdQuery {
        &self.step.query
    }

    pub fn audit(&self) -> Vec<serde_json::Value> {
        let digits: Vec<String> = self.digits.iter().map(Count::to_string).collect();
        vec![
            json!({
                "step": "pack",
                "digit_width": self.packed.digit_width,
                "digit_count": self.packed.digit_count,
                "digits": digits,
                "y": self.step.target.to_string(),
                "scope": self.packed.formula.scope(),
                "size": self.packed.formula.size(),
            }),
            self.step.audit(),
        ]
    }
}

/// Collapses `k` claims over a common scope `n` into one threshold query
/// that holds iff every claim is true.
pub fn combine_equalities(qs: &[EqualityQuery]) -> Result<Combined> {
    let first = qs
        .first()
        .ok_or_else(|| Error::Usage("combine needs at least one query".into()))?;
    let n = first.formula.scope();
    if n == 0 {
        return Err(Error::Range {
            what: "scope",
            value: "0".into(),
            bound: ">= 1".into(),
        });
    }
    let cap = pow2(n as usize);
    for (index, q) in qs.iter().enumerate() {
        if q.formula.scope() != n {
            return Err(Error::Arity {
                index,
                expected: n,
                found: q.formula.scope(),
            });
        }
        if q.claimed > cap {
            return Err(Error::Range {
                what: "claimed count",
                value: q.claimed.to_string(),
                bound: format!("<= 2^{n}"),
            });
        }
    }
    let formulas: Vec<Formula> = qs.iter().map(|q| q.formula.clone()).collect();
    let packed = pack_many(&formulas)?;
    let digits: Vec<Count> = qs.iter().map(|q| q.claimed.clone()).collect();
    let target = pack_digits(&digits, n);
    let step = eq_to_geq(&packed.formula, &target)?;
    Ok(Combined {
        packed,
        digits,
        step,
    })
}

/// Decides the threshold query with the fast counter.
pub fn verify_threshold(q: &ThresholdQuery) -> bool {
    q.bound.is_zero() || threshold_check(&q.formula, &q.bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::count::count_bruteforce;

    fn f(text: &str) -> Formula {
        parse_circuit(text).unwrap()
    }

    fn c(v: u64) -> Count {
        Count::from(v)
    }

    #[test]
    fn direct_branch_true_claim() {
        let h = f("(scope 2) (or x1 x2)");
        let r = eq_to_geq(&h, &c(3)).unwrap();
        assert_eq!(r.branch, Branch::Direct);
        assert_eq!(r.delta, c(1));
        assert_eq!(r.query.bound, c(9));
        assert_eq!(count_bruteforce(&r.query.formula).unwrap(), c(9));
        assert!(verify_threshold(&r.query));
    }

    #[test]
    fn direct_branch_false_claim() {
        let h = f("(scope 2) (or x1 x2)");
        let r = eq_to_geq(&h, &c(2)).unwrap();
        assert_eq!(r.branch, Branch::Direct);
        assert_eq!(r.delta, c(0));
        assert_eq!(r.query.bound, c(4));
        assert_eq!(count_bruteforce(&r.query.formula).unwrap(), c(3));
        assert!(!verify_threshold(&r.query));
    }

    #[test]
    fn negated_branch() {
        let h = f("(scope 2) (or x1 x2)");
        let r = eq_to_geq(&h, &c(1)).unwrap();
        assert_eq!(r.branch, Branch::Negated);
        assert_eq!(r.delta, c(1));
        // ¬h has 1 model, target 3: K(1) = 1·(4 − 1 + 2) = 5 < 9
        assert_eq!(r.query.bound, c(9));
        assert_eq!(count_bruteforce(&r.query.formula).unwrap(), c(5));
        assert!(!verify_threshold(&r.query));
    }

    #[test]
    fn eq_to_geq_range() {
        let h = f("(scope 2) (or x1 x2)");
        assert!(eq_to_geq(&h, &c(5)).is_err());
        assert!(eq_to_geq(&Formula::constant(true, 0), &c(1)).is_err());
        assert!(eq_to_geq(&h, &c(4)).is_ok());
        assert!(eq_to_geq(&h, &c(0)).is_ok());
    }

    #[test]
    fn combine_true_claims() {
        let qs = [
            EqualityQuery::new(f("(scope 2) (and x1 x2)"), c(1)).unwrap(),
            EqualityQuery::new(f("(scope 2) (or x1 x2)"), c(3)).unwrap(),
        ];
        let r = combine_equalities(&qs).unwrap();
        assert_eq!(r.packed.formula.scope(), 6);
        assert_eq!(r.step.target, c(25));
        assert_eq!(r.step.branch, Branch::Negated);
        assert_eq!(r.step.delta, c(7));
        assert_eq!(r.query().bound, c(1521));
        assert_eq!(r.query().formula.scope(), 13);
        assert_eq!(count_bruteforce(&r.query().formula).unwrap(), c(1521));
        assert!(verify_threshold(r.query()));
    }

    #[test]
    fn combine_false_claim() {
        let qs = [
            EqualityQuery::new(f("(scope 2) (and x1 x2)"), c(2)).unwrap(),
            EqualityQuery::new(f("(scope 2) (or x1 x2)"), c(3)).unwrap(),
        ];
        let r = combine_equalities(&qs).unwrap();
        assert_eq!(r.step.target, c(26));
        let actual = count_bruteforce(&r.query().formula).unwrap();
        assert!(actual < r.query().bound);
        assert!(!verify_threshold(r.query()));
    }

    #[test]
    fn combine_singleton_unsat() {
        let qs = [EqualityQuery::new(Formula::constant(false, 1), c(0)).unwrap()];
        let r = combine_equalities(&qs).unwrap();
        assert!(verify_threshold(r.query()));
    }

    #[test]
    fn combine_validation() {
        assert!(combine_equalities(&[]).is_err());
        let bad = EqualityQuery {
            formula: Formula::constant(true, 1),
            claimed: c(3),
        };
        assert!(matches!(combine_equalities(&[bad]), Err(Error::Range { .. })));
        assert!(EqualityQuery::new(Formula::constant(true, 1), c(3)).is_err());
        let mixed = [
            EqualityQuery::new(Formula::constant(true, 1), c(2)).unwrap(),
            EqualityQuery::new(Formula::constant(true, 2), c(4)).unwrap(),
        ];
        assert!(matches!(combine_equalities(&mixed), Err(Error::Arity { .. })));
    }

    #[test]
    fn threshold_query_bound_cap() {
        let g = f("(scope 2) (or x1 x2)");
        let q = ThresholdQuery::new(g.clone(), c(5)).unwrap();
        assert!(!verify_threshold(&q));
        assert!(ThresholdQuery::new(g.clone(), c(6)).is_err());
        assert!(verify_threshold(&ThresholdQuery::new(g, c(3)).unwrap()));
    }
}
