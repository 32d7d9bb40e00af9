//! Abelian varieties with a prescribed group of rational points.
//!
//! Every realization is returned as a [`RealizationCertificate`]: a list of
//! isogeny classes, each with an ideal in its Frobenius algebra, whose
//! groups of points multiply to the requested group.

mod batches;
mod certificate;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

pub use batches::{coprime_batches, CoprimeBatch};
pub use certificate::{
    verify_certificate, CertificateFlags, CertificateJson, CertificatePart, LatticeJson, Mismatch, PartJson,
    RealizationCertificate, VerificationReport, CERTIFICATE_VERSION,
};

use crate::math::arith::prime_power;
use crate::math::group::FiniteAbelianGroup;
use crate::math::quadratic::QuadraticRingElement;
use crate::orders::{
    frobenius_order, group_of_points, maximal_order, FractionalIdeal, OrderError, DEFAULT_CANDIDATE_CAP,
};
use crate::weil::{
    search_with_point_count, validate_i64, FieldSize, Requirements, SearchLimit, WeilError, WeilPolynomial,
};

/// Dimension cap for searches when nothing better is known.
pub const DEFAULT_G_CAP: usize = 6;

/// Group orders `n` over `F_7` with no ordinary square-free class having
/// exactly `n` points.
pub const F7_EXCEPTIONS: [u64; 6] = [2, 8, 14, 16, 17, 73];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("no suitable class with {m} points up to dimension {g_max}")]
    NotFound { m: BigInt, g_max: usize },
    #[error("q = {0} is not handled by this construction")]
    UnsupportedField(u64),
    #[error("{0}")]
    ObstructionExists(Box<NonexistenceReport>),
    #[error("only {found} of {needed} irreducible classes with {ell} points up to dimension {g_cap}")]
    InsufficientSupply { ell: u64, needed: usize, found: usize, g_cap: usize },
    #[error("class has group {found}, expected {expected}")]
    GroupMismatch { expected: FiniteAbelianGroup, found: FiniteAbelianGroup },
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Weil(#[from] WeilError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RealizeOptions {
    /// Overrides the dimension cap of every per-factor search.
    pub g_cap: Option<usize>,
}

/// Prime-power cyclic factors of `g`, grouped by prime, ascending.
pub fn decompose_group(g: &FiniteAbelianGroup) -> Vec<BigInt> {
    g.primary_decomposition()
}

/// Least `d ≥ 3` with `m < (4/3)·2^d + 1`: over `F_2` every `m ≥ 1` is the
/// point count of an ordinary square-free class of dimension at most `d`.
pub fn dimension_bound(m: &BigInt) -> usize {
    let lhs = 3 * (m - 1);
    (3..).find(|&d| lhs < BigInt::from(4) << d).expect("some power of two is large enough")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObstructionReason {
    /// `q > (m + 1)^2` for the exponent `m`.
    ExponentBound,
    /// `m` is a power of the characteristic and `q > (√m + 1)^2`.
    ExponentBoundPPower,
}

impl fmt::Display for ObstructionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObstructionReason::ExponentBound => "ExponentBound",
            ObstructionReason::ExponentBoundPPower => "ExponentBoundPPower",
        })
    }
}

/// Proof that no abelian variety over `F_q` has group `group`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonexistenceReport {
    pub q: u64,
    pub group: FiniteAbelianGroup,
    pub exponent: BigInt,
    pub reason: ObstructionReason,
    /// The bound on `q` that is exceeded.
    pub bound: QuadraticRingElement,
}

impl fmt::Display for NonexistenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} over F_{}: exponent {} forces q <= {} ({})",
            self.group, self.q, self.exponent, self.bound, self.reason
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonexistenceOutcome {
    Obstructed(NonexistenceReport),
    NoObstruction,
}

/// Checks the exponent bounds. A group of exponent `m > 1` is the group of
/// points of a variety over `F_q` only if `q ≤ (m + 1)^2`, and, when `m` is
/// a power of the characteristic, only if `q ≤ (√m + 1)^2`.
pub fn nonexistence_check(g: &FiniteAbelianGroup, q: u64) -> Result<NonexistenceOutcome, RealizeError> {
    let field = FieldSize::new(q)?;
    let m = g.exponent();
    if m <= BigInt::one() {
        return Ok(NonexistenceOutcome::NoObstruction);
    }
    let qb = BigInt::from(q);
    let square = (&m + 1u32) * (&m + 1u32);
    let report = |reason, bound| NonexistenceOutcome::Obstructed(NonexistenceReport {
        q,
        group: g.clone(),
        exponent: m.clone(),
        reason,
        bound,
    });
    if qb > square {
        let bound = QuadraticRingElement::rational(square.into());
        return Ok(report(ObstructionReason::ExponentBound, bound));
    }
    let p_power = m.to_u64().and_then(prime_power).is_some_and(|(p, _)| p == field.characteristic());
    // q > m + 1 + 2√m, squared out exactly
    let gap = &qb - &m - 1u32;
    if p_power && gap > BigInt::from(0) && &gap * &gap > 4u32 * &m {
        let bound = QuadraticRingElement::rational((&m + 1u32).into())
            .add(&QuadraticRingElement::sqrt_multiple(2, &m));
        return Ok(report(ObstructionReason::ExponentBoundPPower, bound));
    }
    Ok(NonexistenceOutcome::NoObstruction)
}

fn unit_ideal_part(w: WeilPolynomial) -> Result<CertificatePart, RealizeError> {
    let order = frobenius_order(&w)?;
    let ideal = FractionalIdeal::unit(&order);
    let group = group_of_points(&ideal)?;
    Ok(CertificatePart { weil: w, ideal, group })
}

/// The first class (by dimension, then coefficients) with `m` points
/// meeting `required`, with the ideal `Z[π, π̄]`. Its group must be cyclic.
fn cyclic_part(q: u64, m: &BigInt, g_max: usize, required: Requirements) -> Result<CertificatePart, RealizeError> {
    let hit = match search_with_point_count(q, m, g_max, required, SearchLimit::First(1)) {
        Ok(outcome) => outcome.hits.into_iter().next().expect("nonempty outcome"),
        Err(WeilError::NotFoundWithinCap { m, g_max }) => return Err(RealizeError::NotFound { m, g_max }),
        Err(e) => return Err(e.into()),
    };
    let part = unit_ideal_part(hit)?;
    let expected = FiniteAbelianGroup::from_cyclic_orders(std::slice::from_ref(m)).expect("positive order");
    if part.group != expected {
        return Err(RealizeError::GroupMismatch { expected, found: part.group });
    }
    Ok(part)
}

fn ordinary_parts(
    q: u64,
    factors: &[BigInt],
    cap: impl Fn(&BigInt) -> usize,
) -> Result<Vec<CertificatePart>, RealizeError> {
    factors.iter().map(|s| cyclic_part(q, s, cap(s), Requirements::square_free_ordinary())).collect()
}

/// Realizes `g` over `F_2`, `F_3` or `F_5` as a product of ordinary
/// square-free classes, one per primary cyclic factor. Over `F_2` each
/// factor `Z/n` uses dimension at most [`dimension_bound`]`(n)`.
///
/// The trivial group is realized by an ordinary class with one point over
/// `F_2`, and by the zero-dimensional variety over `F_3` and `F_5`. Over
/// `F_5` one point is below the Weil bound, and over `F_3` no ordinary
/// square-free class of dimension at most 6 has one point.
pub fn realize(g: &FiniteAbelianGroup, q: u64, options: &RealizeOptions) -> Result<RealizationCertificate, RealizeError> {
    if ![2, 3, 5].contains(&q) {
        return Err(RealizeError::UnsupportedField(q));
    }
    let cap = |m: &BigInt| match (options.g_cap, q) {
        (Some(c), _) => c,
        (None, 2) => dimension_bound(m),
        (None, _) => DEFAULT_G_CAP,
    };
    let factors = if g.is_trivial() {
        if q == 2 {
            vec![BigInt::one()]
        } else {
            vec![]
        }
    } else {
        decompose_group(g)
    };
    let parts = ordinary_parts(q, &factors, cap)?;
    Ok(RealizationCertificate::new(q, g.clone(), parts))
}

/// The surface `2.4.ad_h` with its maximal order, whose group is `(Z/3)^2`.
fn f4_surface_part() -> Result<CertificatePart, RealizeError> {
    let w = validate_i64(&[1, -3, 7, -12, 16], 4)?;
    let order = maximal_order(&frobenius_order(&w)?, DEFAULT_CANDIDATE_CAP)?;
    let ideal = FractionalIdeal::unit(&order);
    let group = group_of_points(&ideal)?;
    Ok(CertificatePart { weil: w, ideal, group })
}

/// Realizes `g` over `F_4`.
///
/// Write `g = (Z/3)^{2e+δ} × ∏ Z/s_j` with every `s_j` a prime power other
/// than 3. Each pair of `Z/3` factors comes from the surface `2.4.ad_h`;
/// the `s_j` come from ordinary square-free classes. A leftover `Z/3` is
/// merged into the smallest `s_j` prime to 3 when there is one; otherwise
/// `g` is a 3-group and the leftover factor is the supersingular curve
/// `x^2 - 2x + 4`, making the result almost ordinary.
pub fn realize_f4(g: &FiniteAbelianGroup, options: &RealizeOptions) -> Result<RealizationCertificate, RealizeError> {
    let q = 4;
    let cap = |_: &BigInt| options.g_cap.unwrap_or(DEFAULT_G_CAP);
    let three = BigInt::from(3);
    let primary = decompose_group(g);
    let bare_threes = primary.iter().filter(|s| **s == three).count();
    let mut others: Vec<BigInt> = primary.into_iter().filter(|s| *s != three).collect();
    let mut parts = Vec::new();
    if bare_threes >= 2 {
        let surface = f4_surface_part()?;
        parts.extend(std::iter::repeat_n(surface, bare_threes / 2));
    }
    if bare_threes % 2 == 1 {
        let merge = others
            .iter()
            .enumerate()
            .filter(|(_, s)| (*s % &three) != BigInt::from(0))
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i);
        match merge {
            Some(i) => others[i] *= &three,
            None => parts.push(unit_ideal_part(validate_i64(&[1, -2, 4], q)?)?),
        }
    }
    parts.extend(ordinary_parts(q, &others, cap)?);
    Ok(RealizationCertificate::new(q, g.clone(), parts))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum F7Outcome {
    Realized(RealizationCertificate),
    /// `n` is in [`F7_EXCEPTIONS`]. For 8 and 73 a non-ordinary square-free
    /// class without real roots still gives `Z/n`.
    Exceptional { n: u64, alternative: Option<RealizationCertificate> },
}

/// Realizes `Z/n` over `F_7` by one ordinary square-free class.
pub fn realize_f7_cyclic(n: u64, options: &RealizeOptions) -> Result<F7Outcome, RealizeError> {
    let q = 7;
    let cap = options.g_cap.unwrap_or(DEFAULT_G_CAP);
    let target = FiniteAbelianGroup::cyclic(n);
    if n == 1 {
        return Ok(F7Outcome::Realized(RealizationCertificate::new(q, target, vec![])));
    }
    let m = BigInt::from(n);
    if F7_EXCEPTIONS.contains(&n) {
        let alternative = if n == 8 || n == 73 {
            let required = Requirements { square_free: true, cs: true, ..Default::default() };
            match cyclic_part(q, &m, cap, required) {
                Ok(part) => Some(RealizationCertificate::new(q, target, vec![part])),
                Err(RealizeError::NotFound { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        return Ok(F7Outcome::Exceptional { n, alternative });
    }
    let part = cyclic_part(q, &m, cap, Requirements::square_free_ordinary())?;
    Ok(F7Outcome::Realized(RealizationCertificate::new(q, target, vec![part])))
}

/// Any other field: rule out `g` by the exponent bounds if possible, and
/// otherwise look for one ordinary square-free class per primary factor.
pub fn realize_general(
    g: &FiniteAbelianGroup,
    q: u64,
    options: &RealizeOptions,
) -> Result<RealizationCertificate, RealizeError> {
    if let NonexistenceOutcome::Obstructed(report) = nonexistence_check(g, q)? {
        return Err(RealizeError::ObstructionExists(Box::new(report)));
    }
    let cap = |_: &BigInt| options.g_cap.unwrap_or(DEFAULT_G_CAP);
    let parts = ordinary_parts(q, &decompose_group(g), cap)?;
    Ok(RealizationCertificate::new(q, g.clone(), parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::from_u64s(f).unwrap()
    }

    fn coeffs(c: &RealizationCertificate) -> Vec<Vec<i64>> {
        c.parts()
            .iter()
            .map(|p| p.weil.coefficients().iter().map(|x| x.to_i64().unwrap()).collect())
            .collect()
    }

    #[test]
    fn dimension_bounds() {
        let d = |m: i64| dimension_bound(&BigInt::from(m));
        assert_eq!(d(1), 3);
        assert_eq!(d(11), 3);
        assert_eq!(d(12), 4);
        assert_eq!(d(22), 4);
        assert_eq!(d(23), 5);
    }

    #[test]
    fn cyclic_four_over_f2() {
        let c = realize(&grp(&[4]), 2, &RealizeOptions::default()).unwrap();
        assert_eq!(coeffs(&c), vec![vec![1, 1, 2]]);
        assert!(c.flags().all_ordinary);
        assert!(verify_certificate(&c.to_json()).passed());
    }

    #[test]
    fn trivial_groups() {
        let c = realize(&FiniteAbelianGroup::trivial(), 2, &RealizeOptions::default()).unwrap();
        assert_eq!(c.parts().len(), 1);
        assert_eq!(c.parts()[0].weil.point_count(), BigInt::one());
        assert!(c.dimension_total() <= 3);
        let c = realize(&FiniteAbelianGroup::trivial(), 5, &RealizeOptions::default()).unwrap();
        assert!(c.parts().is_empty());
        assert!(verify_certificate(&c.to_json()).passed());
    }

    #[test]
    fn f4_case_analysis() {
        let opts = RealizeOptions::default();
        let c = realize_f4(&grp(&[3]), &opts).unwrap();
        assert_eq!(coeffs(&c), vec![vec![1, -2, 4]]);
        assert!(c.flags().almost_ordinary);

        let c = realize_f4(&grp(&[3, 3]), &opts).unwrap();
        assert_eq!(coeffs(&c), vec![vec![1, -3, 7, -12, 16]]);
        assert!(c.flags().all_ordinary && !c.flags().almost_ordinary);

        let c = realize_f4(&grp(&[15]), &opts).unwrap();
        assert_eq!(c.parts().len(), 1);
        assert_eq!(c.parts()[0].weil.point_count(), BigInt::from(15));
        assert!(c.flags().all_ordinary);

        let c = realize_f4(&grp(&[3, 9]), &opts).unwrap();
        assert!(c.flags().almost_ordinary);
        for c in [c, realize_f4(&grp(&[3, 3, 6]), &opts).unwrap()] {
            let report = verify_certificate(&c.to_json());
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn f7_exceptions() {
        let opts = RealizeOptions::default();
        for n in F7_EXCEPTIONS {
            match realize_f7_cyclic(n, &opts).unwrap() {
                F7Outcome::Exceptional { alternative, .. } => {
                    assert_eq!(alternative.is_some(), n == 8 || n == 73, "n = {n}");
                    if let Some(c) = alternative {
                        assert!(!c.flags().all_ordinary);
                        assert!(c.flags().square_free_parts);
                        assert!(verify_certificate(&c.to_json()).passed());
                    }
                }
                other => panic!("{n}: {other:?}"),
            }
        }
        let F7Outcome::Realized(c) = realize_f7_cyclic(6, &opts).unwrap() else { panic!() };
        assert_eq!(c.parts().len(), 1);
    }

    #[test]
    fn exponent_obstructions() {
        let klein = grp(&[2, 2]);
        let reason = |q| match nonexistence_check(&klein, q).unwrap() {
            NonexistenceOutcome::Obstructed(r) => Some(r.reason),
            NonexistenceOutcome::NoObstruction => None,
        };
        assert_eq!(reason(8), Some(ObstructionReason::ExponentBoundPPower));
        assert_eq!(reason(11), Some(ObstructionReason::ExponentBound));
        for q in [2, 3, 4, 5, 7, 9] {
            assert_eq!(reason(q), None, "q = {q}");
        }
        assert!(matches!(
            realize_general(&klein, 8, &RealizeOptions::default()),
            Err(RealizeError::ObstructionExists(_))
        ));
    }

    #[test]
    fn tampered_certificates_fail() {
        let c = realize(&grp(&[2, 4]), 3, &RealizeOptions::default()).unwrap();
        let good = c.to_json();
        assert!(verify_certificate(&good).passed());

        let mut bad = good.clone();
        bad.group = vec!["8".into()];
        assert!(!verify_certificate(&bad).passed());

        let mut bad = good.clone();
        bad.parts[0].p_rank += 1;
        assert_eq!(verify_certificate(&bad).mismatches[0].field, "parts[0].p_rank");

        let mut bad = good.clone();
        bad.parts[0].coeffs[1] = "5".into();
        assert!(!verify_certificate(&bad).passed());

        let mut bad = good.clone();
        bad.flags.all_ordinary = false;
        assert_eq!(verify_certificate(&bad).mismatches[0].field, "flags");

        let mut bad = good;
        bad.parts[1].group = vec!["2".into(), "2".into()];
        assert_eq!(verify_certificate(&bad).mismatches[0].field, "parts[1].group");
    }
}
