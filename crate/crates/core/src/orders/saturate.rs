//! Discriminants and enlargement of orders toward the maximal order.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{multiplication_matrix, ring_closure, FrobeniusOrder, OrderError};
use crate::math::arith::factor;
use crate::math::lattice::IntMatrix;

/// Default bound on the `p^n` candidates tried in one saturation round.
pub const DEFAULT_CANDIDATE_CAP: u64 = 1_000_000;

/// Characteristic polynomial `det(t - M)` of a square integer matrix,
/// constant term first, by the Faddeev–LeVerrier recursion. The divisions
/// by `k` are exact over the integers.
pub fn characteristic_polynomial(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = m.len();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut aux: IntMatrix = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // aux <- M·aux + c_{n-k+1}·I
        let mut next = mat_mul(m, &aux);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        aux = next;
        let am = mat_mul(m, &aux);
        let tr: BigInt = (0..n).map(|i| am[i][i].clone()).sum();
        c[n - k] = -tr / BigInt::from(k);
    }
    c
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMatrix {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

fn rational_determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let k = &m[r][c] / &pivot;
            for j in c..n {
                let t = &k * &m[c][j];
                m[r][j] -= t;
            }
        }
    }
    det
}

/// `det(Tr(b_i b_j))` over the lattice basis of `o`.
pub fn trace_form_disc(o: &FrobeniusOrder) -> BigInt {
    let algebra = o.algebra();
    let basis = o.basis_elements();
    let n = basis.len();
    let mut gram = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let t = algebra.trace(&algebra.mul(&basis[i], &basis[j]));
            gram[i][j] = t.clone();
            gram[j][i] = t;
        }
    }
    let det = rational_determinant(gram);
    assert!(det.is_integer(), "order discriminant must be an integer");
    det.to_integer()
}

fn divides_with_multiplicity(p: &BigInt, d: &BigInt, k: u32) -> bool {
    (d % p.pow(k)).is_zero()
}

/// The `p`-maximal overorder of `o`.
///
/// Each round tries every `x/p` with `x` running over nonzero residues of
/// `o / p·o`; `x/p` is integral exactly when the `k`-th coefficient of the
/// characteristic polynomial of `x` is divisible by `p^k`. The ring
/// generated by the hits replaces `o`, until a round finds nothing.
pub fn p_saturate(o: &FrobeniusOrder, p: u64, cap: u64) -> Result<FrobeniusOrder, OrderError> {
    let pb = BigInt::from(p);
    let mut disc = trace_form_disc(o);
    if !divides_with_multiplicity(&pb, &disc, 2) {
        return Ok(o.clone());
    }
    let algebra = o.algebra().clone();
    let n = algebra.degree();
    let candidates = (p as f64).powi(n as i32);
    if candidates > cap as f64 {
        return Err(OrderError::CandidateSpaceTooLarge { p, n, cap });
    }
    let mut current = o.clone();
    loop {
        let basis = current.basis_elements();
        let mats: Vec<IntMatrix> = basis
            .iter()
            .map(|b| multiplication_matrix(&current, b))
            .collect::<Result<_, _>>()?;
        let mut hits: Vec<Vec<BigRational>> = Vec::new();
        let mut digits = vec![0u64; n];
        loop {
            // mixed-radix increment; the all-zero vector is skipped
            let mut i = 0;
            while i < n && digits[i] == p - 1 {
                digits[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            digits[i] += 1;
            let mut m = vec![vec![BigInt::zero(); n]; n];
            for (d, mat) in digits.iter().zip(&mats) {
                if *d == 0 {
                    continue;
                }
                let d = BigInt::from(*d);
                for r in 0..n {
                    for c in 0..n {
                        m[r][c] += &d * &mat[r][c];
                    }
                }
            }
            let chi = characteristic_polynomial(&m);
            let integral = (1..=n).all(|k| divides_with_multiplicity(&pb, &chi[n - k], k as u32));
            if integral {
                let mut v = vec![BigRational::zero(); n];
                for (d, b) in digits.iter().zip(&basis) {
                    if *d == 0 {
                        continue;
                    }
                    let scaled = algebra.coordinates(b);
                    for (vi, bi) in v.iter_mut().zip(scaled) {
                        *vi += bi * BigRational::new(BigInt::from(*d), pb.clone());
                    }
                }
                hits.push(v);
            }
        }
        if hits.is_empty() {
            return Ok(current);
        }
        let mut generators = current.lattice().rational_rows();
        generators.extend(hits);
        let lattice = ring_closure(&algebra, generators)?;
        let index = lattice.index(current.lattice())?;
        let next = FrobeniusOrder::from_trusted(algebra.clone(), lattice);
        let next_disc = trace_form_disc(&next);
        assert_eq!(&next_disc * &index * &index, disc, "discriminant-index identity");
        disc = next_disc;
        current = next;
    }
}

/// Saturates `o` at every prime whose square divides its discriminant.
pub fn maximal_order(o: &FrobeniusOrder, cap: u64) -> Result<FrobeniusOrder, OrderError> {
    let disc = trace_form_disc(o);
    let mut current = o.clone();
    for (p, e) in factor(&disc.abs().to_biguint().unwrap_or_else(BigUint::zero))? {
        if e >= 2 {
            let p = p.to_u64().ok_or(OrderError::CandidateSpaceTooLarge { p: u64::MAX, n: 0, cap })?;
            current = p_saturate(&current, p, cap)?;
        }
    }
    Ok(current)
}
