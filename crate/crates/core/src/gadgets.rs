//! Formula constructions with exact model-count contracts.
//!
//! * [`pack_pair`] / [`pack_many`]: pack several counts into the base-`2^(n+1)`
//!   digits of one count.
//! * [`less_than_const`]: a comparator circuit with exactly `c` models.
//! * [`psi_gadget`] with [`k_value`]: maps a count `X` to
//!   `X·(2^n − X + 2Δ)`, a downward parabola whose apex sits at `2^(n−1) + Δ`.
//!
//! Constructors never simplify, so every size below is exact for the
//! right-folded binary encoding.

use num_traits::{One, Zero};

use crate::count::{pow2, Count};
use crate::error::{Error, Result};
use crate::formula::{Formula, Node};

fn range_error(what: &'static str, value: &Count, bound: String) -> Error {
    Error::Range {
        what,
        value: value.to_string(),
        bound,
    }
}

/// Packs two counts: `#result = #f + #g · 2^m` over scope `m + n + 1`, where
/// `m` and `n` are the scopes of `f` and `g`.
///
/// ```text
/// (f(x1..xm) ∧ ¬x(m+1) ∧ … ∧ ¬x(m+n+1)) ∨ (g(x(m+1)..x(m+n)) ∧ x(m+n+1))
/// ```
///
/// The last variable selects the branch. In the `f` branch the whole `g`
/// block is pinned to zero so it contributes `#f`; in the `g` branch the `f`
/// block is free and contributes `2^m` per model of `g`.
///
/// Size: `size(f) + size(g) + 2n + 4`.
pub fn pack_pair(f: &Formula, g: &Formula) -> Formula {
    let m = f.scope();
    let n = g.scope();
    let selector = m + n + 1;
    let f_branch = Node::conjunction(
        std::iter::once(f.root().clone()).chain((m + 1..=selector).map(|i| Node::not(Node::var(i)))),
    )
    .expect("non-empty");
    let g_branch = Node::and(g.root().shifted(m), Node::var(selector));
    Formula::from_parts(Node::or(f_branch, g_branch), selector)
}

/// Exact operator count of [`pack_pair`] for operands of the given sizes.
pub fn pack_pair_size(f_size: usize, g_size: usize, g_scope: u32) -> usize {
    f_size + g_size + 2 * g_scope as usize + 4
}

/// A chain of packed operands and its digit layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedFormula {
    pub formula: Formula,
    /// Scope `n` shared by every operand.
    pub digit_width: u32,
    /// Number `k` of packed operands.
    pub digit_count: usize,
}

impl PackedFormula {
    /// `k · (n + 1)`, always equal to the scope of `formula`.
    pub fn total_scope(&self) -> u32 {
        self.digit_count as u32 * (self.digit_width + 1)
    }
}

/// Packs `k` operands of common scope `n` so that digit `i` (base
/// `2^(n+1)`, least significant first) of the packed count is `#fs[i]`.
///
/// The chain starts from `fs[0] ∧ ¬x(n+1)` so that every stage has a scope
/// that is a multiple of `n + 1`; each further operand is added with
/// [`pack_pair`].
///
/// Size: `Σ size(fᵢ) + 2 + (k − 1)(2n + 4)`.
pub fn pack_many(fs: &[Formula]) -> Result<PackedFormula> {
    let first = fs.first().ok_or_else(|| Error::Usage("pack needs at least one operand".into()))?;
    let n = first.scope();
    if let Some((index, g)) = fs.iter().enumerate().find(|(_, g)| g.scope() != n) {
        return Err(Error::Arity {
            index,
            expected: n,
            found: g.scope(),
        });
    }
    let seed = Node::and(first.root().clone(), Node::not(Node::var(n + 1)));
    let mut packed = Formula::from_parts(seed, n + 1);
    for g in &fs[1..] {
        packed = pack_pair(&packed, g);
    }
    Ok(PackedFormula {
        formula: packed,
        digit_width: n,
        digit_count: fs.len(),
    })
}

/// Exact operator count of [`pack_many`].
pub fn pack_many_size(operand_sizes: &[usize], n: u32) -> usize {
    let k = operand_sizes.len();
    operand_sizes.iter().sum::<usize>() + 2 + k.saturating_sub(1) * (2 * n as usize + 4)
}

/// Splits `c` into `k` base-`2^(n+1)` digits, least significant first.
pub fn unpack_digits(c: &Count, n: u32, k: usize) -> Result<Vec<Count>> {
    let width = n as usize + 1;
    if c >= &pow2(k * width) {
        return Err(range_error("packed count", c, format!("< 2^{}", k * width)));
    }
    let mask = pow2(width) - Count::one();
    Ok((0..k).map(|i| (c >> (i * width)) & &mask).collect())
}

/// Inverse of [`unpack_digits`]: `Σ dᵢ · 2^(i(n+1))`.
pub fn pack_digits(digits: &[Count], n: u32) -> Count {
    let width = n as usize + 1;
    digits
        .iter()
        .enumerate()
        .fold(Count::zero(), |acc, (i, d)| acc + (d << (i * width)))
}

/// A formula over `x1..xn` whose models are exactly the assignments with
/// `Σ 2^i · x(i+1) < c`, hence exactly `c` models.
///
/// Built from the least significant bit upward as `L0 = false`,
/// `Li = ¬xi ∨ L(i−1)` where bit `i−1` of `c` is set and `Li = ¬xi ∧ L(i−1)`
/// otherwise, so `x_n` ends up outermost. `c = 2^n` yields `true`.
///
/// Size: `2n` for `c < 2^n`, `0` for `c = 2^n`.
pub fn less_than_const(n: u32, c: &Count) -> Result<Formula> {
    let full = pow2(n as usize);
    if c > &full {
        return Err(range_error("c", c, format!("<= 2^{n}")));
    }
    if c == &full {
        return Ok(Formula::constant(true, n));
    }
    let mut acc = Node::constant(false);
    for i in 1..=n {
        let neg = Node::not(Node::var(i));
        acc = if c.bit(u64::from(i - 1)) {
            Node::or(neg, acc)
        } else {
            Node::and(neg, acc)
        };
    }
    Ok(Formula::from_parts(acc, n))
}

/// Exact operator count of [`less_than_const`].
pub fn less_than_const_size(n: u32, c: &Count) -> usize {
    if c == &pow2(n as usize) {
        0
    } else {
        2 * n as usize
    }
}

fn check_delta(n: u32, delta: &Count) -> Result<()> {
    // 2Δ ≤ 2^n, i.e. Δ ≤ 2^(n−1), and Δ = 0 when n = 0
    if (delta << 1usize) > pow2(n as usize) {
        return Err(range_error("delta", delta, format!("<= 2^({n}-1)")));
    }
    Ok(())
}

/// `K(X) = X · (2^n − X + 2Δ)`.
pub fn k_value(n: u32, delta: &Count, x: &Count) -> Result<Count> {
    check_delta(n, delta)?;
    let full = pow2(n as usize);
    if x > &full {
        return Err(range_error("x", x, format!("<= 2^{n}")));
    }
    Ok(x * (full - x + (delta << 1usize)))
}

/// The equality-to-inequality gadget over scope `2n + 1`:
///
/// ```text
/// f(x1..xn) ∧ ((¬f(x(n+1)..x(2n)) ∧ ¬x(2n+1)) ∨ (M(x(n+1)..x(2n)) ∧ x(2n+1)))
/// ```
///
/// where `M = less_than_const(n, 2Δ)`. Its count is `k_value(n, Δ, #f)`.
///
/// Size: `2·size(f) + size(M) + 6`.
pub fn psi_gadget(f: &Formula, delta: &Count) -> Result<Formula> {
    let n = f.scope();
    check_delta(n, delta)?;
    let threshold = less_than_const(n, &(delta << 1usize))?;
    let selector = Node::var(2 * n + 1);
    let complement = Node::and(Node::not(f.root().shifted(n)), Node::not(selector.clone()));
    let padding = Node::and(threshold.root().shifted(n), selector);
    let root = Node::and(f.root().clone(), Node::or(complement, padding));
    Ok(Formula::from_parts(root, 2 * n + 1))
}

/// Exact operator count of [`psi_gadget`].
pub fn psi_gadget_size(f_size: usize, n: u32, delta: &Count) -> usize {
    2 * f_size + less_than_const_size(n, &(delta << 1usize)) + 6
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

    fn brute(f: &Formula) -> Count {
        count_bruteforce(f).unwrap()
    }

    #[test]
    fn pack_pair_examples() {
        let p = pack_pair(&f("(scope 1) x1"), &f("(scope 2) (or x1 x2)"));
        assert_eq!(p.scope(), 4);
        assert_eq!(brute(&p), c(7));

        let p = pack_pair(&Formula::constant(false, 2), &Formula::constant(false, 2));
        assert_eq!(brute(&p), c(0));

        let p = pack_pair(&Formula::constant(true, 2), &Formula::constant(true, 2));
        assert_eq!(p.scope(), 5);
        assert_eq!(brute(&p), c(20));
        assert_eq!(p.size(), pack_pair_size(0, 0, 2));
    }

    #[test]
    fn pack_pair_layout() {
        let p = pack_pair(&f("(scope 1) x1"), &f("(scope 1) (not x1)"));
        assert_eq!(
            p.to_string(),
            "(scope 3)\n(or (and x1 (and (not x2) (not x3))) (and (not x2) x3))\n"
        );
    }

    #[test]
    fn pack_many_examples() {
        let p = pack_many(&[f("(scope 2) (and x1 x2)"), f("(scope 2) (or x1 x2)")]).unwrap();
        assert_eq!(p.total_scope(), 6);
        assert_eq!(p.formula.scope(), 6);
        assert_eq!(brute(&p.formula), c(25));
        assert_eq!(p.formula.size(), pack_many_size(&[1, 1], 2));

        let single = pack_many(&[f("(scope 2) (or x1 x2)")]).unwrap();
        assert_eq!(single.formula.scope(), 3);
        assert_eq!(brute(&single.formula), c(3));

        let t = Formula::constant(true, 1);
        let p = pack_many(&[t.clone(), t.clone(), t]).unwrap();
        assert_eq!(p.formula.scope(), 6);
        assert_eq!(brute(&p.formula), c(42));
    }

    #[test]
    fn pack_many_rejects_bad_operands() {
        assert!(pack_many(&[]).is_err());
        assert_eq!(
            pack_many(&[Formula::constant(true, 2), Formula::constant(true, 3)]),
            Err(Error::Arity {
                index: 1,
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn unpack_examples() {
        assert_eq!(unpack_digits(&c(25), 2, 2).unwrap(), vec![c(1), c(3)]);
        assert_eq!(unpack_digits(&c(0), 3, 4).unwrap(), vec![c(0); 4]);
        assert_eq!(unpack_digits(&c(42), 1, 3).unwrap(), vec![c(2); 3]);
        assert!(unpack_digits(&c(64), 1, 3).is_err());
        assert_eq!(pack_digits(&[c(1), c(3)], 2), c(25));
    }

    #[test]
    fn less_than_examples() {
        let m = less_than_const(3, &c(5)).unwrap();
        assert_eq!(brute(&m), c(5));
        assert_eq!(m.size(), 6);
        assert_eq!(brute(&less_than_const(3, &c(0)).unwrap()), c(0));
        assert_eq!(brute(&less_than_const(3, &c(8)).unwrap()), c(8));
        assert!(matches!(less_than_const(3, &c(9)), Err(Error::Range { .. })));
        assert_eq!(less_than_const(0, &c(1)).unwrap(), Formula::constant(true, 0));
        assert_eq!(brute(&less_than_const(0, &c(0)).unwrap()), c(0));
    }

    #[test]
    fn less_than_models_are_the_small_values() {
        use crate::formula::Assignment;
        let m = less_than_const(4, &c(11)).unwrap();
        for value in 0..16u64 {
            let a = Assignment::from_mask(value, 4);
            assert_eq!(m.evaluate(&a).unwrap(), value < 11, "value {value}");
        }
    }

    #[test]
    fn k_value_examples() {
        assert_eq!(k_value(2, &c(1), &c(3)).unwrap(), c(9));
        assert_eq!(k_value(2, &c(1), &c(2)).unwrap(), c(8));
        assert_eq!(k_value(2, &c(1), &c(4)).unwrap(), c(8));
        assert_eq!(k_value(7, &c(13), &c(0)).unwrap(), c(0));
        assert!(k_value(2, &c(3), &c(1)).is_err());
        assert!(k_value(2, &c(1), &c(5)).is_err());
    }

    #[test]
    fn psi_examples() {
        let g = psi_gadget(&f("(scope 2) (or x1 x2)"), &c(1)).unwrap();
        assert_eq!(g.scope(), 5);
        assert_eq!(brute(&g), c(9));
        assert_eq!(g.size(), psi_gadget_size(1, 2, &c(1)));

        let g = psi_gadget(&Formula::constant(false, 2), &c(2)).unwrap();
        assert_eq!(brute(&g), c(0));

        let g = psi_gadget(&Formula::constant(true, 1), &c(0)).unwrap();
        assert_eq!(brute(&g), c(0));

        assert!(psi_gadget(&Formula::constant(true, 2), &c(3)).is_err());
    }
}
