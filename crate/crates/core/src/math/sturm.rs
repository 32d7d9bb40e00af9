//! Sturm sequences with exact evaluation in a real quadratic field.

use std::cmp::Ordering;


use super::poly::{squarefree_part, IntPolynomial, RatPolynomial};
use super::quadratic::{eval_at, QuadraticRingElement};

/// Canonical Sturm chain `p, p', -rem(p, p'), ...`.
pub fn sturm_chain(p: &RatPolynomial) -> Vec<RatPolynomial> {
    let mut chain = vec![p.clone()];
    let d = p.derivative();
    if d.is_zero() {
        return chain;
    }
    chain.push(d);
    loop {
        let n = chain.len();
        let r = chain[n - 2].rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(r.scale(&-num_rational::BigRational::from_integer(1.into())));
    }
    chain
}

fn sign_variations(chain: &[RatPolynomial], x: &QuadraticRingElement) -> usize {
    let signs: Vec<Ordering> = chain
        .iter()
        .map(|p| eval_at(p, x).signum())
        .filter(|s| *s != Ordering::Equal)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots of `h` in the closed interval `[lo, hi]`.
///
/// Endpoint roots are found by exact evaluation; their minimal polynomials
/// are divided out before the Sturm chain is run on the open interval, and
/// every removed root (including an irrational endpoint's conjugate) that
/// lies in `[lo, hi]` is added back.
pub fn sturm_count(h: &IntPolynomial, lo: &QuadraticRingElement, hi: &QuadraticRingElement) -> usize {
    assert!(!h.is_zero(), "Sturm count of the zero polynomial");
    assert!(lo < hi, "empty interval");
    let mut s = squarefree_part(h).to_rational();
    let mut removed: Vec<QuadraticRingElement> = Vec::new();
    for end in [lo, hi] {
        if s.degree().unwrap_or(0) > 0 && eval_at(&s, end).is_zero() {
            let m = end.minimal_polynomial();
            let (quot, rem) = s.div_rem(&m);
            debug_assert!(rem.is_zero());
            s = quot;
            removed.push(end.clone());
            if !end.is_rational() {
                removed.push(end.conjugate());
            }
        }
    }
    removed.sort();
    removed.dedup();
    let boundary = removed.iter().filter(|r| *r >= lo && *r <= hi).count();
    let chain = sturm_chain(&s);
    sign_variations(&chain, lo) - sign_variations(&chain, hi) + boundary
}
