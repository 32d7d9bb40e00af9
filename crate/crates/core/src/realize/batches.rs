//! Batches of classes over `F_2` sharing one Weil polynomial but realizing
//! every abelian group of a given order.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{CertificatePart, RealizationCertificate, RealizeError};
use crate::math::arith::factor_u64;
use crate::math::group::{enumerate_abelian_groups, FiniteAbelianGroup};
use crate::math::poly::IntPolynomial;
use crate::orders::{frobenius_order, group_of_points, product_algebra_assemble, FractionalIdeal};
use crate::weil::{search_with_point_count, validate, Requirements, SearchLimit, WeilError, WeilPolynomial};

/// One batch: a product `f = f_1 ⋯ f_r` of distinct irreducible Weil
/// 2-polynomials with `∏ f_i(1) = n`, and for every abelian group of order
/// `n` (in [`enumerate_abelian_groups`] order) a single-part certificate
/// with Weil polynomial `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeBatch {
    pub factors: Vec<WeilPolynomial>,
    pub certificates: Vec<RealizationCertificate>,
}

impl CoprimeBatch {
    /// `f`, or `None` for `n = 1`.
    pub fn polynomial(&self) -> Option<&WeilPolynomial> {
        self.certificates.first().and_then(|c| c.parts().first()).map(|p| &p.weil)
    }
}

/// `batch_count` batches for `n`, pairwise coprime across batches, using
/// classes of dimension at most `g_cap`.
///
/// For each prime `ℓ` with `ℓ^k ‖ n`, batch `j` takes the irreducible
/// classes with `ℓ` points numbered `jk, …, jk + k - 1` in (dimension,
/// coefficients) order. A group `∏ Z/d_i` is obtained by grouping the
/// factors into sub-products with `d_i` points; each sub-product's
/// Frobenius order has cyclic group, and the orders are glued along the
/// product decomposition of the algebra.
pub fn coprime_batches(n: u64, batch_count: usize, g_cap: usize) -> Result<Vec<CoprimeBatch>, RealizeError> {
    let q = 2;
    let primes = factor_u64(n);
    let mut supply: BTreeMap<u64, Vec<WeilPolynomial>> = BTreeMap::new();
    for &(ell, k) in &primes {
        let needed = k as usize * batch_count;
        let required = Requirements { square_free: true, cs: true, irreducible: true, ..Default::default() };
        let hits = match search_with_point_count(q, &BigInt::from(ell), g_cap, required, SearchLimit::First(needed)) {
            Ok(outcome) => outcome.hits,
            Err(WeilError::NotFoundWithinCap { .. }) => vec![],
            Err(e) => return Err(e.into()),
        };
        if hits.len() < needed {
            return Err(RealizeError::InsufficientSupply { ell, needed, found: hits.len(), g_cap });
        }
        supply.insert(ell, hits);
    }
    let groups = enumerate_abelian_groups(n);
    (0..batch_count)
        .map(|j| {
            let per_prime: BTreeMap<u64, &[WeilPolynomial]> = primes
                .iter()
                .map(|&(ell, k)| (ell, &supply[&ell][j * k as usize..(j + 1) * k as usize]))
                .collect();
            let factors = per_prime.values().flat_map(|v| v.iter().cloned()).collect();
            let certificates =
                groups.iter().map(|g| batch_certificate(g, &per_prime)).collect::<Result<_, _>>()?;
            Ok(CoprimeBatch { factors, certificates })
        })
        .collect()
}

fn valuation(d: &BigInt, ell: u64) -> usize {
    let ell = BigInt::from(ell);
    let mut d = d.clone();
    let mut v = 0;
    while (&d % &ell) == BigInt::from(0) {
        d /= &ell;
        v += 1;
    }
    v
}

fn batch_certificate(
    g: &FiniteAbelianGroup,
    per_prime: &BTreeMap<u64, &[WeilPolynomial]>,
) -> Result<RealizationCertificate, RealizeError> {
    let q = 2;
    if g.is_trivial() {
        return Ok(RealizationCertificate::new(q, g.clone(), vec![]));
    }
    let mut next: BTreeMap<u64, usize> = per_prime.keys().map(|&ell| (ell, 0)).collect();
    let mut pieces = Vec::new();
    for d in g.invariant_factors() {
        let mut product = IntPolynomial::one();
        for (&ell, polys) in per_prime {
            let start = next[&ell];
            let take = valuation(d, ell);
            for w in &polys[start..start + take] {
                product = &product * w.poly();
            }
            next.insert(ell, start + take);
        }
        let w = validate(&product.descending(), q)?;
        let ideal = FractionalIdeal::unit(&frobenius_order(&w)?);
        pieces.push((w, ideal));
    }
    let (weil, ideal) = if pieces.len() == 1 {
        pieces.pop().expect("one piece")
    } else {
        product_algebra_assemble(&pieces)?
    };
    let group = group_of_points(&ideal)?;
    if &group != g {
        return Err(RealizeError::GroupMismatch { expected: g.clone(), found: group });
    }
    Ok(RealizationCertificate::new(q, g.clone(), vec![CertificatePart { weil, ideal, group }]))
}
