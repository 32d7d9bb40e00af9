//! Weil `q`-polynomials: validation, invariants, predicates, enumeration and
//! LMFDB-style labels.
//!
//! Coefficient lists crossing the public surface are written leading term
//! first, `[1, a_1, …, a_2g]`, matching the `a_i` naming of isogeny-class
//! labels.

mod corpus;
mod enumerate;
mod label;
mod newton;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::math::arith::{exact_sqrt, prime_power};
use crate::math::poly::{is_squarefree, IntPolynomial};
use crate::math::quadratic::QuadraticRingElement;
use crate::math::sturm::sturm_count;

pub use corpus::{corpus_header, format_corpus, parse_corpus, CorpusError, CORPUS_VERSION};
pub use enumerate::{
    enumerate, enumerate_palindromic, search_with_point_count, search_with_source, ClassSource, FactorBase, NoCache,
    Requirements,
    SearchLimit, SearchOutcome, MAX_ENUMERATION_DIMENSION,
};
pub use label::{decode_label, encode_coefficient, encode_label};
pub use newton::{lower_newton_polygon, newton_polygon_p_rank, NewtonSegment};

/// Largest dimension accepted by [`is_irreducible`].
pub const IRREDUCIBILITY_DIMENSION_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotWeilReason {
    NotMonic,
    OddDegree,
    /// The part left after removing real-root factors violates
    /// `a_{2g-i} = q^{g-i} a_i`.
    FunctionalEquation,
    /// Some complex root does not have absolute value `√q`.
    RootOffCircle,
}

impl fmt::Display for NotWeilReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NotWeilReason::NotMonic => "not monic",
            NotWeilReason::OddDegree => "odd or zero degree",
            NotWeilReason::FunctionalEquation => "functional equation fails",
            NotWeilReason::RootOffCircle => "complex root off the circle |z| = sqrt(q)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeilError {
    #[error("not a Weil polynomial: {0}")]
    NotWeil(NotWeilReason),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("polynomial does not satisfy the functional equation")]
    NotPalindromic,
    #[error("malformed label {0:?}")]
    MalformedLabel(String),
    #[error("dimension {g} exceeds the cap {cap}")]
    DimensionCapExceeded { g: usize, cap: usize },
    #[error("no Weil polynomial with {m} points found up to dimension {g_max}")]
    NotFoundWithinCap { m: BigInt, g_max: usize },
    #[error("classes with an odd power of x^2 - q have no label")]
    NotLabelable,
}

/// A validated field size `q = p^a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSize {
    q: u64,
    p: u64,
    a: u32,
}

impl FieldSize {
    pub fn new(q: u64) -> Result<Self, WeilError> {
        let (p, a) = prime_power(q).ok_or(WeilError::NotPrimePower(q))?;
        Ok(FieldSize { q, p, a })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.a
    }

    pub fn is_prime(&self) -> bool {
        self.a == 1
    }

    /// `√q` when `q` is a perfect square.
    pub fn sqrt(&self) -> Option<u64> {
        exact_sqrt(self.q)
    }

    /// `2√q` as an exact quadratic number.
    pub fn real_bound(&self) -> QuadraticRingElement {
        QuadraticRingElement::sqrt_multiple(2, &BigInt::from(self.q))
    }
}

/// Multiplicities of the real-root factors split off during validation.
///
/// For non-square `q` only `x2_minus_q` can be nonzero; for square `q = s^2`
/// the factors `x - s` and `x + s` are tracked separately.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RealRootFactors {
    pub x2_minus_q: u32,
    pub x_minus_sqrt_q: u32,
    pub x_plus_sqrt_q: u32,
}

impl RealRootFactors {
    pub fn is_empty(&self) -> bool {
        self.x2_minus_q == 0 && self.x_minus_sqrt_q == 0 && self.x_plus_sqrt_q == 0
    }

    /// Whether the split-off part itself satisfies the functional equation.
    fn is_palindromic(&self) -> bool {
        self.x2_minus_q % 2 == 0 && self.x_minus_sqrt_q % 2 == 0
    }
}

/// A monic integer polynomial of degree `2g` all of whose complex roots have
/// absolute value `√q`. Only [`validate`] constructs these.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeilPolynomial {
    poly: IntPolynomial,
    field: FieldSize,
    g: usize,
    p_rank: usize,
    real_roots: RealRootFactors,
}

impl WeilPolynomial {
    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn field(&self) -> FieldSize {
        self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q
    }

    pub fn dimension(&self) -> usize {
        self.g
    }

    pub fn p_rank(&self) -> usize {
        self.p_rank
    }

    pub fn real_root_factors(&self) -> RealRootFactors {
        self.real_roots
    }

    pub fn has_real_root(&self) -> bool {
        !self.real_roots.is_empty()
    }

    /// Whether `f` itself satisfies the functional equation, i.e. the
    /// multiplicity of `x^2 - q` (or of `x - √q`) is even.
    pub fn is_palindromic(&self) -> bool {
        self.real_roots.is_palindromic()
    }

    /// `[1, a_1, …, a_2g]`.
    pub fn coefficients(&self) -> Vec<BigInt> {
        self.poly.descending()
    }

    /// `a_1, …, a_g`, the data carried by a label.
    pub fn half_coefficients(&self) -> Vec<BigInt> {
        self.poly.descending()[1..=self.g].to_vec()
    }

    /// Middle coefficient `a_g`.
    pub fn middle_coefficient(&self) -> BigInt {
        self.poly.coeff(self.g)
    }

    /// `f(1)`, the number of rational points of any variety in the class.
    ///
    /// Non-palindromic polynomials (odd power of `x^2 - q`) have
    /// `f(1) = (1 - q)·r(1) ≤ 0`; they are not characteristic polynomials of
    /// Frobenius but are kept in the enumeration.
    pub fn point_count(&self) -> BigInt {
        self.poly.eval(&BigInt::one())
    }

    /// The real Weil polynomial `h` with `f(x) = x^g h(x + q/x)`, for
    /// palindromic `f`.
    pub fn real_weil_polynomial(&self) -> Option<IntPolynomial> {
        if !self.is_palindromic() {
            return None;
        }
        real_weil_transform(&self.poly, self.field.q).ok()
    }

    pub fn is_ordinary(&self) -> bool {
        self.p_rank == self.g
    }

    pub fn is_almost_ordinary(&self) -> bool {
        self.g >= 1 && self.p_rank + 1 == self.g
    }

    /// LMFDB-style label `g.q.a_1_…_a_g`; `None` for non-palindromic classes.
    pub fn label(&self) -> Option<String> {
        self.is_palindromic()
            .then(|| encode_label(self.g, self.field.q, &self.half_coefficients()))
    }

    pub fn from_label(label: &str) -> Result<Self, WeilError> {
        let (g, q, half) = decode_label(label)?;
        let f = complete_palindromic(q, g, &half);
        validate(&f.descending(), q)
    }
}

impl fmt::Display for WeilPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over F_{}", self.poly, self.field.q)
    }
}

/// Rebuilds `f` from `a_1, …, a_g` with `a_{2g-i} = q^{g-i} a_i`.
pub fn complete_palindromic(q: u64, g: usize, half: &[BigInt]) -> IntPolynomial {
    assert_eq!(half.len(), g, "expected {g} coefficients");
    let q = BigInt::from(q);
    let mut desc = vec![BigInt::zero(); 2 * g + 1];
    desc[0] = BigInt::one();
    for (i, a) in half.iter().enumerate() {
        desc[i + 1] = a.clone();
    }
    for i in 0..g {
        desc[2 * g - i] = &desc[i] * q.pow((g - i) as u32);
    }
    IntPolynomial::from_descending(&desc)
}

fn satisfies_functional_equation(f: &IntPolynomial, q: &BigInt) -> bool {
    let Some(d) = f.degree() else { return false };
    if d % 2 == 1 {
        return false;
    }
    let g = d / 2;
    // coefficient of x^i against coefficient of x^{2g-i}
    (0..=g).all(|i| f.coeff(i) == f.coeff(d - i) * q.pow((g - i) as u32))
}

/// `h` of degree `g'` with `f(x) = x^{g'} h(x + q/x)`, peeling the top
/// coefficient of `f` one power at a time.
pub fn real_weil_transform(palindromic: &IntPolynomial, q: u64) -> Result<IntPolynomial, WeilError> {
    let qb = BigInt::from(q);
    if !satisfies_functional_equation(palindromic, &qb) {
        return Err(WeilError::NotPalindromic);
    }
    let g = palindromic.degree().unwrap() / 2;
    let x2_plus_q = IntPolynomial::new(vec![qb.clone(), BigInt::zero(), BigInt::one()]);
    let mut rest = palindromic.clone();
    let mut h_desc = Vec::with_capacity(g + 1);
    for j in 0..=g {
        let c = rest.coeff(2 * g - j);
        // x^j (x^2 + q)^{g-j} has leading term x^{2g-j}
        let term = &(&IntPolynomial::monomial(j) * &x2_plus_q.pow(g - j)) * &IntPolynomial::constant(c.clone());
        rest = &rest - &term;
        h_desc.push(c);
    }
    if !rest.is_zero() {
        return Err(WeilError::NotPalindromic);
    }
    Ok(IntPolynomial::from_descending(&h_desc))
}

/// Inverse of [`real_weil_transform`]: `x^g h(x + q/x)`.
pub fn from_real_weil_polynomial(h: &IntPolynomial, q: u64) -> IntPolynomial {
    let g = h.degree().expect("nonzero real Weil polynomial");
    let x2_plus_q = IntPolynomial::from_i64s(&[0, 0, 1]);
    let x2_plus_q = &x2_plus_q + &IntPolynomial::constant(BigInt::from(q));
    let mut f = IntPolynomial::zero();
    for i in 0..=g {
        // coefficient of y^{g-i}
        let c = h.coeff(g - i);
        if c.is_zero() {
            continue;
        }
        let term = &IntPolynomial::monomial(i) * &x2_plus_q.pow(g - i);
        f = &f + &term.scale(&c);
    }
    f
}

/// Validates `coeffs` (leading term first) as a Weil `q`-polynomial.
///
/// Real-root factors `x^2 - q` (non-square `q`) or `x ∓ √q` (square `q`) are
/// split off first; the rest must satisfy the functional equation and have a
/// real Weil polynomial whose roots all lie in `[-2√q, 2√q]`.
pub fn validate(coeffs: &[BigInt], q: u64) -> Result<WeilPolynomial, WeilError> {
    let field = FieldSize::new(q)?;
    let poly = IntPolynomial::from_descending(coeffs);
    validate_poly(poly, field)
}

pub fn validate_i64(coeffs: &[i64], q: u64) -> Result<WeilPolynomial, WeilError> {
    validate(&coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>(), q)
}

pub(crate) fn validate_poly(poly: IntPolynomial, field: FieldSize) -> Result<WeilPolynomial, WeilError> {
    if !poly.is_monic() {
        return Err(WeilError::NotWeil(NotWeilReason::NotMonic));
    }
    let deg = poly.degree().unwrap();
    if deg == 0 || deg % 2 == 1 {
        return Err(WeilError::NotWeil(NotWeilReason::OddDegree));
    }
    let q = BigInt::from(field.q);
    let mut real_roots = RealRootFactors::default();
    let mut rest = poly.clone();
    match field.sqrt() {
        Some(s) => {
            let s = BigInt::from(s);
            let minus = IntPolynomial::new(vec![-&s, BigInt::one()]);
            let plus = IntPolynomial::new(vec![s, BigInt::one()]);
            while let Some(r) = rest.div_exact(&minus) {
                rest = r;
                real_roots.x_minus_sqrt_q += 1;
            }
            while let Some(r) = rest.div_exact(&plus) {
                rest = r;
                real_roots.x_plus_sqrt_q += 1;
            }
        }
        None => {
            let x2_minus_q = IntPolynomial::new(vec![-q.clone(), BigInt::zero(), BigInt::one()]);
            while rest.degree().unwrap_or(0) >= 2 {
                match rest.div_exact(&x2_minus_q) {
                    Some(r) => {
                        rest = r;
                        real_roots.x2_minus_q += 1;
                    }
                    None => break,
                }
            }
        }
    }
    if !satisfies_functional_equation(&rest, &q) {
        return Err(WeilError::NotWeil(NotWeilReason::FunctionalEquation));
    }
    let h = real_weil_transform(&rest, field.q)
        .map_err(|_| WeilError::NotWeil(NotWeilReason::FunctionalEquation))?;
    if h.degree().unwrap() > 0 {
        let bound = field.real_bound();
        let distinct = crate::math::poly::squarefree_part(&h).degree().unwrap();
        if sturm_count(&h, &bound.neg(), &bound) != distinct {
            return Err(WeilError::NotWeil(NotWeilReason::RootOffCircle));
        }
    }
    let p_rank = newton_polygon_p_rank(&poly, field.p);
    Ok(WeilPolynomial { poly, field, g: deg / 2, p_rank, real_roots })
}

/// Point count `f(1)`.
pub fn point_count(w: &WeilPolynomial) -> BigInt {
    w.point_count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IsogenyClassPredicates {
    pub square_free: bool,
    pub ordinary: bool,
    pub almost_ordinary: bool,
    pub has_real_root: bool,
    /// Prime field and no real root.
    pub cs: bool,
    /// `None` when the dimension exceeds the irreducibility cap.
    pub irreducible: Option<bool>,
}

impl IsogenyClassPredicates {
    /// Everything except irreducibility, which needs a factor search.
    pub fn without_irreducibility(w: &WeilPolynomial) -> Self {
        let has_real_root = w.has_real_root();
        IsogenyClassPredicates {
            square_free: is_squarefree(w.poly()),
            ordinary: w.is_ordinary(),
            almost_ordinary: w.is_almost_ordinary(),
            has_real_root,
            cs: w.field().is_prime() && !has_real_root,
            irreducible: None,
        }
    }
}

pub fn predicates(w: &WeilPolynomial) -> IsogenyClassPredicates {
    let mut p = IsogenyClassPredicates::without_irreducibility(w);
    p.irreducible = is_irreducible(w).ok();
    p
}

/// Whether `f` has no nontrivial monic integer factor, decided by trial
/// division by every Weil `q`-polynomial of dimension at most `g/2` (and by
/// `x ∓ √q` for square `q`), since factors of Weil polynomials are Weil.
pub fn is_irreducible(w: &WeilPolynomial) -> Result<bool, WeilError> {
    if w.dimension() > IRREDUCIBILITY_DIMENSION_CAP {
        return Err(WeilError::DimensionCapExceeded {
            g: w.dimension(),
            cap: IRREDUCIBILITY_DIMENSION_CAP,
        });
    }
    Ok(FactorBase::new(w.field(), w.dimension() / 2)?.is_irreducible(w))
}

/// `|f(1)|` lies in `[(√q - 1)^{2g}, (√q + 1)^{2g}]`, checked exactly.
pub fn within_weil_bounds(w: &WeilPolynomial) -> bool {
    let (lo, hi) = weil_bounds(w.field(), w.dimension());
    let n = QuadraticRingElement::rational(num_rational::BigRational::from_integer(w.point_count().abs()));
    lo <= n && n <= hi
}

/// `((√q - 1)^{2g}, (√q + 1)^{2g})` as exact quadratic numbers.
pub fn weil_bounds(field: FieldSize, g: usize) -> (QuadraticRingElement, QuadraticRingElement) {
    let root = QuadraticRingElement::sqrt_multiple(1, &BigInt::from(field.q()));
    let one = QuadraticRingElement::from_integer(1);
    (root.sub(&one).pow(2 * g as u32), root.add(&one).pow(2 * g as u32))
}
