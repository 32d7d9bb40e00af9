//! Enumeration of Weil `q`-polynomials and point-count searches.
//!
//! Palindromic polynomials are enumerated through their real Weil
//! polynomials `h(y) = y^g + h_1 y^{g-1} + … + h_g`, one coefficient at a
//! time. At depth `j` the normalized derivative
//! `Q_j = h^{(g-j)} / (g-j)!` has degree `j`, its top `j` coefficients are
//! already fixed and its constant term is `h_j`. Since `Q_j' = (g-j+1)·Q_{j-1}`,
//! the critical points of `Q_j` are the roots of `Q_{j-1}`, and `Q_j` can only
//! be real-rooted in `[-2√q, 2√q]` if its values there alternate in sign and
//! it has the right signs at `±2√q`. Those are necessary conditions and give
//! an interval for `h_j`. Floating point is used only for this pruning, with
//! generous slack; every leaf is validated exactly.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::{from_real_weil_polynomial, validate_poly, weil_bounds, FieldSize, WeilError, WeilPolynomial};
use crate::math::poly::{is_squarefree, IntPolynomial};
use crate::math::quadratic::QuadraticRingElement;

/// Largest dimension [`enumerate`] and [`search_with_point_count`] accept.
pub const MAX_ENUMERATION_DIMENSION: usize = 10;

const BISECTION_STEPS: usize = 200;

fn check_size(field: FieldSize, g: usize) -> Result<(), WeilError> {
    // |h_i| <= C(g, i)·(2√q)^i < (4√q)^g must stay far inside i128
    let magnitude = g as f64 * (4.0 * (field.q() as f64).sqrt()).log2();
    if g > MAX_ENUMERATION_DIMENSION || magnitude > 100.0 {
        return Err(WeilError::DimensionCapExceeded { g, cap: MAX_ENUMERATION_DIMENSION });
    }
    Ok(())
}

struct Kernel {
    field: FieldSize,
    g: usize,
    bound: f64,
    binom: Vec<Vec<f64>>,
    /// `(q+1)^k` for `k = 0..=g`, when it fits.
    shifted_powers: Vec<Option<i128>>,
}

impl Kernel {
    fn new(field: FieldSize, g: usize) -> Self {
        let mut binom = vec![vec![0.0; g + 1]; g + 1];
        for n in 0..=g {
            binom[n][0] = 1.0;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
            }
        }
        let base = field.q() as i128 + 1;
        let mut shifted_powers = vec![Some(1i128)];
        for k in 1..=g {
            shifted_powers.push(shifted_powers[k - 1].and_then(|p| p.checked_mul(base)));
        }
        Kernel { field, g, bound: 2.0 * (field.q() as f64).sqrt(), binom, shifted_powers }
    }

    /// `Σ_{i<j} h_i C(g-i, j-i) y^{j-i}` together with the sum of the
    /// absolute values of its terms.
    fn partial(&self, h: &[i128], j: usize, y: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut size = 0.0;
        for (i, &hi) in h.iter().enumerate().take(j) {
            let term = hi as f64 * self.binom[self.g - i][j - i] * y.powi((j - i) as i32);
            value += term;
            size += term.abs();
        }
        (value, size)
    }

    fn value(&self, h: &[i128], j: usize, hj: i128, y: f64) -> f64 {
        self.partial(h, j, y).0 + hj as f64
    }

    /// Integer interval for `h_j` given the roots of `Q_{j-1}`.
    fn range(&self, h: &[i128], j: usize, critical: &[f64]) -> Option<(i128, i128)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut constrain = |y: f64, upper: bool| {
            let (v, size) = self.partial(h, j, y);
            let tol = 1e-12 * size + 1e-7;
            if upper {
                hi = hi.min(-v + tol);
            } else {
                lo = lo.max(-v - tol);
            }
        };
        // the largest critical point is a local minimum, then they alternate
        for (k, &r) in critical.iter().enumerate() {
            constrain(r, (critical.len() - 1 - k) % 2 == 0);
        }
        constrain(self.bound, false);
        constrain(-self.bound, j % 2 == 1);
        if lo > hi {
            return None;
        }
        Some((lo.ceil() as i128, hi.floor() as i128))
    }

    /// Roots of `Q_j`, one per interval cut out by the critical points.
    fn roots(&self, h: &[i128], j: usize, hj: i128, critical: &[f64]) -> Vec<f64> {
        let mut ends = Vec::with_capacity(j + 1);
        ends.push(-self.bound);
        ends.extend_from_slice(critical);
        ends.push(self.bound);
        ends.windows(2)
            .map(|w| {
                let (mut a, mut b) = (w[0], w[1]);
                let fa = self.value(h, j, hj, a);
                if fa == 0.0 {
                    return a;
                }
                let positive_at_a = fa > 0.0;
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let fm = self.value(h, j, hj, mid);
                    if fm == 0.0 {
                        return mid;
                    }
                    if (fm > 0.0) == positive_at_a {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// `h_g` forced by `h(q+1) = m`.
    fn forced_constant(&self, h: &[i128], m: i128) -> Option<i128> {
        let mut rest = m;
        for (i, &hi) in h.iter().enumerate().take(self.g) {
            let p = self.shifted_powers[self.g - i]?;
            rest = rest.checked_sub(hi.checked_mul(p)?)?;
        }
        Some(rest)
    }

    fn leaf(&self, h: &[i128]) -> Option<WeilPolynomial> {
        let desc: Vec<BigInt> = h.iter().map(|&c| BigInt::from(c)).collect();
        let f = from_real_weil_polynomial(&IntPolynomial::from_descending(&desc), self.field.q());
        validate_poly(f, self.field).ok()
    }

    /// Feeds the leaves below `h` to `sink` in increasing order until it
    /// breaks.
    fn descend(
        &self,
        h: &mut Vec<i128>,
        critical: &[f64],
        target: Option<i128>,
        sink: &mut dyn FnMut(WeilPolynomial) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let j = h.len();
        let Some((lo, hi)) = self.range(h, j, critical) else { return ControlFlow::Continue(()) };
        if j == self.g {
            let constants = match target {
                Some(m) => match self.forced_constant(h, m) {
                    Some(c) if lo <= c && c <= hi => c..=c,
                    _ => return ControlFlow::Continue(()),
                },
                None => lo..=hi,
            };
            for c in constants {
                h.push(c);
                let leaf = self.leaf(h);
                h.pop();
                if let Some(w) = leaf {
                    sink(w)?;
                }
            }
            return ControlFlow::Continue(());
        }
        for c in lo..=hi {
            let roots = self.roots(h, j, c, critical);
            h.push(c);
            let flow = self.descend(h, &roots, target, sink);
            h.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }

    /// The first `limit` leaves accepted by `accept` in the branch `h_1 = c`.
    fn branch(
        &self,
        c: i128,
        target: Option<i128>,
        accept: &(dyn Fn(&WeilPolynomial) -> bool + Sync),
        limit: usize,
    ) -> Vec<WeilPolynomial> {
        let mut out = Vec::new();
        let mut sink = |w: WeilPolynomial| {
            if accept(&w) {
                out.push(w);
                if out.len() >= limit {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        };
        let top = [1i128];
        let roots = self.roots(&top, 1, c, &[]);
        let mut h = vec![1i128, c];
        let _ = self.descend(&mut h, &roots, target, &mut sink);
        out
    }

    /// All palindromic Weil polynomials of dimension `g` (optionally with
    /// `f(1) = m`), in increasing order of `(a_1, …, a_g)`.
    fn run(&self, target: Option<i128>) -> Vec<WeilPolynomial> {
        self.run_filtered(target, &|_| true, usize::MAX)
    }

    /// The first `limit` polynomials of [`Kernel::run`] accepted by
    /// `accept`. Branches `h_1 = c` are searched in parallel rounds, in
    /// order, stopping after the round that fills the quota.
    fn run_filtered(
        &self,
        target: Option<i128>,
        accept: &(dyn Fn(&WeilPolynomial) -> bool + Sync),
        limit: usize,
    ) -> Vec<WeilPolynomial> {
        let top = vec![1i128];
        let Some((lo, hi)) = self.range(&top, 1, &[]) else { return Vec::new() };
        if self.g == 1 {
            let mut out = Vec::new();
            let mut h = top;
            let _ = self.descend(&mut h, &[], target, &mut |w| {
                if accept(&w) {
                    out.push(w);
                }
                if out.len() >= limit {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            return out;
        }
        // f(1) = ∏ (q + 1 - y_i) over the roots y_i of h, all factors
        // positive, so by AM-GM f(1) <= ((g(q+1) + h_1) / g)^g.
        let lo = match target {
            Some(m) if m > 0 => {
                let g = self.g as u32;
                let shift = BigInt::from(self.g) * BigInt::from(self.field.q() + 1);
                let scaled = BigInt::from(m) * BigInt::from(self.g).pow(g);
                (lo..=hi).find(|&c| (&shift + c).pow(g) >= scaled).unwrap_or(hi + 1)
            }
            _ => lo,
        };
        let round = if limit == usize::MAX { usize::MAX } else { rayon::current_num_threads().max(1) };
        let mut out: Vec<WeilPolynomial> = Vec::new();
        let mut next = lo;
        while next <= hi && out.len() < limit {
            let end = next.saturating_add(round.min(i128::MAX as usize) as i128 - 1).min(hi);
            let found: Vec<Vec<WeilPolynomial>> = (next..=end)
                .into_par_iter()
                .map(|c| self.branch(c, target, accept, limit - out.len()))
                .collect();
            out.extend(found.into_iter().flatten());
            next = end + 1;
        }
        out.truncate(limit);
        out
    }
}

/// Palindromic Weil `q`-polynomials of dimension `g`, sorted by
/// `(a_1, …, a_g)`.
pub fn enumerate_palindromic(q: u64, g: usize) -> Result<Vec<WeilPolynomial>, WeilError> {
    let field = FieldSize::new(q)?;
    check_size(field, g)?;
    if g == 0 {
        return Ok(Vec::new());
    }
    Ok(Kernel::new(field, g).run(None))
}

/// Every Weil `q`-polynomial of degree `2g`, each once, sorted by the
/// coefficient vector `(a_1, …, a_2g)`.
///
/// Besides the palindromic ones this includes `(x^2 - q)·r` for every
/// palindromic `r` of dimension `g - 1` (and `x^2 - q` itself for `g = 1`).
pub fn enumerate(q: u64, g: usize) -> Result<Vec<WeilPolynomial>, WeilError> {
    let field = FieldSize::new(q)?;
    check_size(field, g)?;
    if g == 0 {
        return Ok(Vec::new());
    }
    let mut all = enumerate_palindromic(q, g)?;
    let x2_minus_q = IntPolynomial::new(vec![-BigInt::from(q), BigInt::zero(), BigInt::from(1)]);
    let smaller: Vec<IntPolynomial> = if g == 1 {
        vec![IntPolynomial::one()]
    } else {
        enumerate_palindromic(q, g - 1)?.into_iter().map(|w| w.poly().clone()).collect()
    };
    for r in smaller {
        let w = validate_poly(&x2_minus_q * &r, field).expect("product of Weil polynomials");
        all.push(w);
    }
    all.sort_by_cached_key(|w| w.coefficients());
    Ok(all)
}

/// Predicates a search hit must satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Requirements {
    pub square_free: bool,
    pub ordinary: bool,
    pub cs: bool,
    pub irreducible: bool,
}

impl Requirements {
    pub fn square_free_ordinary() -> Self {
        Requirements { square_free: true, ordinary: true, ..Default::default() }
    }

    /// `factors` must be given, and cover `w`, when irreducibility is required.
    pub fn accepts(&self, w: &WeilPolynomial, factors: Option<&FactorBase>) -> bool {
        let field = w.field();
        !(self.ordinary && !w.is_ordinary()
            || self.cs && !(field.is_prime() && !w.has_real_root())
            || self.square_free && !is_squarefree(w.poly())
            || self.irreducible && !factors.expect("factor base for irreducibility").is_irreducible(w))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchLimit {
    All,
    First(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub hits: Vec<WeilPolynomial>,
    /// Every dimension up to the cap was scanned completely.
    pub exhaustive: bool,
}

/// Where a search gets the classes of one dimension from.
pub trait ClassSource {
    /// The full output of [`enumerate`]`(q, g)` if it is at hand. `None`
    /// makes the search run the targeted kernel instead.
    fn enumerated(&self, q: u64, g: usize) -> Option<Vec<WeilPolynomial>>;
}

/// Always runs the kernel.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoCache;

impl ClassSource for NoCache {
    fn enumerated(&self, _: u64, _: usize) -> Option<Vec<WeilPolynomial>> {
        None
    }
}

/// Weil `q`-polynomials with `f(1) = m` and dimension at most `g_max`
/// satisfying `required`, ordered by `(g, a_1, …, a_g)`.
///
/// Only palindromic polynomials can have `f(1) ≥ 1`. Dimensions whose Weil
/// interval `[(√q-1)^{2g}, (√q+1)^{2g}]` misses `m` are skipped. An empty
/// result is `NotFoundWithinCap`: nothing exists up to `g_max`, which says
/// nothing about larger dimensions.
pub fn search_with_point_count(
    q: u64,
    m: &BigInt,
    g_max: usize,
    required: Requirements,
    limit: SearchLimit,
) -> Result<SearchOutcome, WeilError> {
    search_with_source(&NoCache, q, m, g_max, required, limit)
}

/// [`search_with_point_count`], taking whole dimensions from `source` when
/// it has them. The result does not depend on `source`.
pub fn search_with_source(
    source: &dyn ClassSource,
    q: u64,
    m: &BigInt,
    g_max: usize,
    required: Requirements,
    limit: SearchLimit,
) -> Result<SearchOutcome, WeilError> {
    let field = FieldSize::new(q)?;
    let wanted = match limit {
        SearchLimit::All => usize::MAX,
        SearchLimit::First(k) => k,
    };
    let mut hits = Vec::new();
    let mut exhaustive = true;
    let m_exact = QuadraticRingElement::rational(num_rational::BigRational::from_integer(m.clone()));
    for g in 1..=g_max {
        let (lo, hi) = weil_bounds(field, g);
        if m_exact < lo || m_exact > hi {
            continue;
        }
        check_size(field, g)?;
        let factors = if required.irreducible {
            if g > super::IRREDUCIBILITY_DIMENSION_CAP {
                return Err(WeilError::DimensionCapExceeded { g, cap: super::IRREDUCIBILITY_DIMENSION_CAP });
            }
            Some(FactorBase::new(field, g / 2)?)
        } else {
            None
        };
        let accept = |w: &WeilPolynomial| required.accepts(w, factors.as_ref());
        let room = wanted - hits.len();
        let found: Vec<WeilPolynomial> = match source.enumerated(q, g) {
            Some(all) => all.into_iter().filter(|w| &w.point_count() == m && accept(w)).take(room).collect(),
            None => match m.to_i128() {
                Some(target) => Kernel::new(field, g).run_filtered(Some(target), &accept, room),
                None => continue,
            },
        };
        hits.extend(found);
        if hits.len() >= wanted {
            exhaustive = false;
            break;
        }
    }
    if hits.is_empty() {
        return Err(WeilError::NotFoundWithinCap { m: m.clone(), g_max });
    }
    Ok(SearchOutcome { hits, exhaustive })
}

/// Candidate divisors for irreducibility tests: every Weil `q`-polynomial of
/// dimension at most `max_dim`, plus `x ∓ √q` for square `q`.
#[derive(Clone, Debug)]
pub struct FactorBase {
    field: FieldSize,
    max_dim: usize,
    divisors: Vec<IntPolynomial>,
}

impl FactorBase {
    pub fn new(field: FieldSize, max_dim: usize) -> Result<Self, WeilError> {
        let mut divisors = Vec::new();
        if let Some(s) = field.sqrt() {
            divisors.push(IntPolynomial::from_i64s(&[-(s as i64), 1]));
            divisors.push(IntPolynomial::from_i64s(&[s as i64, 1]));
        }
        for k in 1..=max_dim {
            divisors.extend(enumerate(field.q(), k)?.into_iter().map(|w| w.poly().clone()));
        }
        Ok(FactorBase { field, max_dim, divisors })
    }

    pub fn field(&self) -> FieldSize {
        self.field
    }

    /// Whether this base has every divisor needed for dimension `g`.
    pub fn covers(&self, g: usize) -> bool {
        g / 2 <= self.max_dim
    }

    /// # Panics
    /// If `w` is over another field or too large for this base.
    pub fn is_irreducible(&self, w: &WeilPolynomial) -> bool {
        assert_eq!(w.field(), self.field, "factor base over another field");
        assert!(self.covers(w.dimension()), "factor base too small for dimension {}", w.dimension());
        let deg = 2 * w.dimension();
        self.divisors
            .iter()
            .filter(|d| 2 * d.degree().unwrap() <= deg)
            .all(|d| w.poly().div_exact(d).is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::{validate, validate_i64};
    use num_traits::Signed;

    fn coeff_lists(ws: &[WeilPolynomial]) -> Vec<Vec<i64>> {
        ws.iter()
            .map(|w| w.coefficients().iter().map(|c| c.to_i64().unwrap()).collect())
            .collect()
    }

    /// Every monic palindromic candidate within the binomial box, validated
    /// exactly.
    fn brute_force_palindromic(q: u64, g: usize) -> Vec<Vec<i64>> {
        let sq = (q as f64).sqrt();
        let box_bound: Vec<i64> = (1..=g)
            .map(|i| {
                let c = (1..=i).fold(1.0, |acc, k| acc * (2 * g + 1 - k) as f64 / k as f64);
                (c * sq.powi(i as i32)).floor() as i64
            })
            .collect();
        let mut out = Vec::new();
        let mut half = vec![0i64; g];
        fn rec(i: usize, half: &mut Vec<i64>, bounds: &[i64], q: u64, out: &mut Vec<Vec<i64>>) {
            if i == half.len() {
                let g = half.len();
                let hb: Vec<BigInt> = half.iter().map(|&x| BigInt::from(x)).collect();
                let f = crate::weil::complete_palindromic(q, g, &hb);
                if let Ok(w) = validate(&f.descending(), q) {
                    out.push(w.coefficients().iter().map(|c| c.to_i64().unwrap()).collect());
                }
                return;
            }
            for a in -bounds[i]..=bounds[i] {
                half[i] = a;
                rec(i + 1, half, bounds, q, out);
            }
        }
        rec(0, &mut half, &box_bound, q, &mut out);
        out
    }

    #[test]
    fn elliptic_over_f2() {
        let all = enumerate(2, 1).unwrap();
        assert_eq!(
            coeff_lists(&all),
            vec![vec![1, -2, 2], vec![1, -1, 2], vec![1, 0, -2], vec![1, 0, 2], vec![1, 1, 2], vec![1, 2, 2]]
        );
        let mut counts: Vec<i64> = all.iter().map(|w| w.point_count().to_i64().unwrap()).collect();
        counts.sort();
        assert_eq!(counts, vec![-1, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn kernel_matches_binomial_box() {
        for (q, g) in [(2, 1), (3, 1), (4, 1), (5, 1), (2, 2), (3, 2), (4, 2), (5, 2), (2, 3)] {
            let fast = coeff_lists(&enumerate_palindromic(q, g).unwrap());
            assert_eq!(fast, brute_force_palindromic(q, g), "q={q} g={g}");
        }
    }

    #[test]
    fn known_class_counts() {
        assert_eq!(enumerate_palindromic(2, 1).unwrap().len(), 5);
        assert_eq!(enumerate_palindromic(2, 2).unwrap().len(), 35);
        assert_eq!(enumerate_palindromic(3, 1).unwrap().len(), 7);
        assert_eq!(enumerate_palindromic(3, 2).unwrap().len(), 63);
        assert_eq!(enumerate_palindromic(2, 3).unwrap().len(), 215);
    }

    #[test]
    fn closed_under_sign_symmetry() {
        for (q, g) in [(2, 2), (4, 2), (3, 3)] {
            let all = enumerate(q, g).unwrap();
            let polys: std::collections::HashSet<_> = all.iter().map(|w| w.poly().clone()).collect();
            assert_eq!(polys.len(), all.len());
            for w in &all {
                assert!(polys.contains(&w.poly().reflect()));
            }
        }
    }

    #[test]
    fn search_examples() {
        let out = search_with_point_count(2, &BigInt::from(4), 1, Requirements::square_free_ordinary(), SearchLimit::All)
            .unwrap();
        assert_eq!(coeff_lists(&out.hits), vec![vec![1, 1, 2]]);
        let ord = Requirements { ordinary: true, ..Default::default() };
        assert_eq!(
            search_with_point_count(4, &BigInt::from(3), 4, ord, SearchLimit::All),
            Err(WeilError::NotFoundWithinCap { m: BigInt::from(3), g_max: 4 })
        );
        let out = search_with_point_count(2, &BigInt::from(1), 3, Requirements::square_free_ordinary(), SearchLimit::First(1))
            .unwrap();
        assert_eq!(out.hits.len(), 1);
        assert_eq!(out.hits[0].coefficients(), validate_i64(&[1, -3, 5, -6, 4], 2).unwrap().coefficients());
    }

    #[test]
    fn search_agrees_with_filtered_enumeration() {
        for q in [2u64, 3, 4] {
            for g in 1..=3 {
                let all = enumerate_palindromic(q, g).unwrap();
                let top = all.iter().map(|w| w.point_count()).max().unwrap().to_i64().unwrap();
                for m in 1..=top {
                    let m = BigInt::from(m);
                    let expect: Vec<_> = all.iter().filter(|w| w.point_count() == m).cloned().collect();
                    let got = match search_with_point_count(q, &m, g, Requirements::default(), SearchLimit::All) {
                        Ok(o) => o.hits.into_iter().filter(|w| w.dimension() == g).collect(),
                        Err(_) => Vec::new(),
                    };
                    assert_eq!(got, expect, "q={q} g={g} m={m}");
                    let required = Requirements::square_free_ordinary();
                    let first: Vec<_> = expect.iter().filter(|w| required.accepts(w, None)).take(2).cloned().collect();
                    let got = match search_with_source(&NoCache, q, &m, g, required, SearchLimit::First(2)) {
                        Ok(o) => o.hits.into_iter().filter(|w| w.dimension() == g).collect(),
                        Err(_) => Vec::new(),
                    };
                    if got.len() == first.len() {
                        assert_eq!(got, first, "q={q} g={g} m={m}, first two");
                    } else {
                        // lower dimensions may have filled the quota
                        assert!(got.len() < first.len());
                        assert_eq!(got[..], first[..got.len()]);
                    }
                }
            }
        }
    }

    #[test]
    fn factor_base_irreducibility() {
        let fb = FactorBase::new(FieldSize::new(2).unwrap(), 1).unwrap();
        let all = enumerate(2, 2).unwrap();
        let reducible = all.iter().filter(|w| !fb.is_irreducible(w)).count();
        // products of two elliptic factors: 6 * 7 / 2 = 21 multisets
        assert_eq!(reducible, 21);
        assert!(all.iter().all(|w| w.point_count().abs() >= BigInt::zero()));
    }
}
