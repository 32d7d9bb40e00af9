//! Integer lattices in canonical Hermite normal form, Smith invariants and
//! finite quotient groups.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::group::FiniteAbelianGroup;

pub type IntMatrix = Vec<Vec<BigInt>>;

pub const DEFAULT_INDEX_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("rows span a lattice of rank {rank}, expected {expected}")]
    NotFullRank { rank: usize, expected: usize },
    #[error("row has length {found}, ambient rank is {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("lattice is not contained in the claimed super-lattice")]
    NotSublattice,
    #[error("index {index} exceeds the enumeration cap {cap}")]
    IndexTooLarge { index: BigInt, cap: u64 },
    #[error("denominator must be positive")]
    BadDenominator,
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn row_axpy(target: &mut [BigInt], k: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= k * s;
    }
}

/// Row-style echelon form of the row span: returns the nonzero rows, each
/// with a positive pivot, entries above every pivot reduced into `[0, pivot)`.
/// The second value lists the pivot columns.
fn echelon(mut m: IntMatrix, ncols: usize) -> (IntMatrix, Vec<usize>) {
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        loop {
            // pivot: smallest nonzero absolute value in column c at or below row r
            let best = (r..m.len())
                .filter(|&i| !m[i][c].is_zero())
                .min_by(|&i, &j| m[i][c].abs().cmp(&m[j][c].abs()));
            let Some(best) = best else { break };
            m.swap(r, best);
            let mut clean = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let k = floor_div(&m[i][c], &m[r][c]);
                let (head, tail) = m.split_at_mut(i);
                row_axpy(&mut tail[0], &k, &head[r]);
                if !m[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r == m.len() || m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let k = floor_div(&m[i][c], &m[r][c]);
            if !k.is_zero() {
                let (head, tail) = m.split_at_mut(r);
                row_axpy(&mut head[i], &k, &tail[0]);
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

/// Canonical upper-triangular Hermite normal form of the row span of `rows`,
/// which must have full rank `ncols`.
pub fn hnf(rows: &[Vec<BigInt>], ncols: usize) -> Result<IntMatrix, LatticeError> {
    for r in rows {
        if r.len() != ncols {
            return Err(LatticeError::DimensionMismatch { found: r.len(), expected: ncols });
        }
    }
    let (m, pivots) = echelon(rows.to_vec(), ncols);
    if pivots.len() != ncols {
        return Err(LatticeError::NotFullRank { rank: pivots.len(), expected: ncols });
    }
    Ok(m)
}

/// Diagonal of the Smith normal form: a divisibility chain of non-negative
/// integers of length `min(rows, cols)`, zeros at the tail for deficient rank.
pub fn snf_invariants(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: IntMatrix = m.to_vec();
    let n = rows.min(cols);
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        // move the smallest nonzero entry of the trailing block to (t, t)
        let pick = |a: &IntMatrix| {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            best
        };
        let Some((i0, j0)) = pick(&a) else {
            diag.resize(n, BigInt::zero());
            break;
        };
        a.swap(t, i0);
        for row in a.iter_mut() {
            row.swap(t, j0);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let k = floor_div(&a[i][t], &a[t][t]);
                let (head, tail) = a.split_at_mut(i);
                row_axpy(&mut tail[0], &k, &head[t]);
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let k = floor_div(&a[t][j], &a[t][t]);
                for row in a.iter_mut() {
                    let s = &k * &row[t];
                    row[j] -= s;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // bring the smallest nonzero entry of row t / column t to the pivot
                let mut best = (t, t);
                for i in t..rows {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..cols {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
                continue;
            }
            // the pivot must divide the whole trailing block
            let offender = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero())
            });
            match offender {
                Some(i) => {
                    let (head, tail) = a.split_at_mut(i);
                    let src = tail[0].clone();
                    for (x, s) in head[t].iter_mut().zip(&src) {
                        *x += s;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// Full-rank lattice `(1/denominator) · rowspan(basis)` in `Q^n`, stored in
/// canonical form: `basis` is the upper-triangular HNF and the denominator is
/// coprime to the content of `basis`. Lattice equality is field equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerLattice {
    basis: IntMatrix,
    denominator: BigInt,
}

impl IntegerLattice {
    pub fn from_integer_rows(rows: &[Vec<BigInt>], ambient_rank: usize) -> Result<Self, LatticeError> {
        Self::from_scaled_rows(rows, BigInt::one(), ambient_rank)
    }

    /// The lattice spanned by `rows / denominator`.
    pub fn from_scaled_rows(
        rows: &[Vec<BigInt>],
        denominator: BigInt,
        ambient_rank: usize,
    ) -> Result<Self, LatticeError> {
        if !denominator.is_positive() {
            return Err(LatticeError::BadDenominator);
        }
        let basis = hnf(rows, ambient_rank)?;
        let content = basis
            .iter()
            .flatten()
            .fold(denominator.clone(), |acc, x| acc.gcd(x));
        let basis = basis
            .into_iter()
            .map(|r| r.into_iter().map(|x| x / &content).collect())
            .collect();
        Ok(IntegerLattice { basis, denominator: denominator / content })
    }

    pub fn from_rational_rows(rows: &[Vec<BigRational>], ambient_rank: usize) -> Result<Self, LatticeError> {
        let den = rows
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled: IntMatrix = rows
            .iter()
            .map(|r| r.iter().map(|x| (x * &den).to_integer()).collect())
            .collect();
        Self::from_scaled_rows(&scaled, den, ambient_rank)
    }

    /// The standard lattice `Z^n`.
    pub fn standard(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IntegerLattice { basis, denominator: BigInt::one() }
    }

    pub fn ambient_rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn is_integral(&self) -> bool {
        self.denominator.is_one()
    }

    pub fn rational_rows(&self) -> Vec<Vec<BigRational>> {
        self.basis
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| BigRational::new(x.clone(), self.denominator.clone()))
                    .collect()
            })
            .collect()
    }

    /// Covolume `|det|` of the lattice.
    pub fn covolume(&self) -> BigRational {
        let diag: BigInt = (0..self.ambient_rank()).map(|i| self.basis[i][i].clone()).product();
        BigRational::new(diag, self.denominator.pow(self.ambient_rank() as u32))
    }

    /// Integer coordinates of `v` in this basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigRational]) -> Option<Vec<BigInt>> {
        let n = self.ambient_rank();
        assert_eq!(v.len(), n, "vector dimension mismatch");
        // work with w = denominator · v, which must be integral
        let mut w = Vec::with_capacity(n);
        for x in v {
            let y = x * &self.denominator;
            if !y.is_integer() {
                return None;
            }
            w.push(y.to_integer());
        }
        let mut coords = Vec::with_capacity(n);
        for i in 0..n {
            let (k, r) = w[i].div_rem(&self.basis[i][i]);
            if !r.is_zero() {
                return None;
            }
            row_axpy(&mut w[i..], &k, &self.basis[i][i..]);
            coords.push(k);
        }
        Some(coords)
    }

    pub fn contains_vector(&self, v: &[BigRational]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains(&self, other: &IntegerLattice) -> bool {
        other.ambient_rank() == self.ambient_rank()
            && other.rational_rows().iter().all(|r| self.contains_vector(r))
    }

    /// Coordinates of `sub`'s basis in this basis, as an integer matrix.
    pub fn relative_matrix(&self, sub: &IntegerLattice) -> Result<IntMatrix, LatticeError> {
        if sub.ambient_rank() != self.ambient_rank() {
            return Err(LatticeError::DimensionMismatch {
                found: sub.ambient_rank(),
                expected: self.ambient_rank(),
            });
        }
        sub.rational_rows()
            .iter()
            .map(|r| self.coordinates(r).ok_or(LatticeError::NotSublattice))
            .collect()
    }

    /// Index `[self : sub]`.
    pub fn index(&self, sub: &IntegerLattice) -> Result<BigInt, LatticeError> {
        if !self.contains(sub) {
            return Err(LatticeError::NotSublattice);
        }
        Ok((sub.covolume() / self.covolume()).to_integer())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        assert!(!c.is_zero(), "scaling by zero");
        let rows: Vec<Vec<BigRational>> = self
            .rational_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|x| x * c).collect())
            .collect();
        Self::from_rational_rows(&rows, self.ambient_rank()).expect("scaling preserves rank")
    }

    /// Sum `self + other`.
    pub fn sum(&self, other: &IntegerLattice) -> Self {
        let mut rows = self.rational_rows();
        rows.extend(other.rational_rows());
        Self::from_rational_rows(&rows, self.ambient_rank()).expect("sum of full-rank lattices")
    }
}

/// The finite group `sup / sub` in invariant-factor form, via the Smith
/// normal form of `sub`'s basis written in `sup`'s coordinates.
pub fn quotient_group(sup: &IntegerLattice, sub: &IntegerLattice) -> Result<FiniteAbelianGroup, LatticeError> {
    let rel = sup.relative_matrix(sub)?;
    Ok(FiniteAbelianGroup::from_snf_diagonal(&snf_invariants(&rel)))
}

/// Group structure of `sup / sub` by enumerating cosets and taking an
/// element-order census; no Smith normal form is involved.
pub fn brute_force_group(
    sup: &IntegerLattice,
    sub: &IntegerLattice,
    cap: u64,
) -> Result<FiniteAbelianGroup, LatticeError> {
    let n = sup.ambient_rank();
    let rel = sup.relative_matrix(sub)?;
    let h = hnf(&rel, n)?;
    let index: BigInt = (0..n).map(|i| h[i][i].clone()).product();
    if index > BigInt::from(cap) {
        return Err(LatticeError::IndexTooLarge { index, cap });
    }
    // entries of the reduced HNF are below the diagonal bound, so i128 suffices
    let h: Vec<Vec<i128>> = h
        .iter()
        .map(|r| r.iter().map(|x| x.to_i128().unwrap()).collect())
        .collect();
    let moduli: Vec<i128> = (0..n).map(|i| h[i][i]).collect();

    let order_of = |v: &[i128]| -> i128 {
        let mut w = v.to_vec();
        let mut order = 1i128;
        for i in 0..n {
            let k = moduli[i] / gcd_i128(w[i], moduli[i]);
            for x in w.iter_mut() {
                *x *= k;
            }
            order *= k;
            let t = w[i] / moduli[i];
            for j in i..n {
                w[j] -= t * h[i][j];
            }
        }
        order
    };

    let mut histogram: std::collections::BTreeMap<i128, u64> = Default::default();
    let mut v = vec![0i128; n];
    loop {
        *histogram.entry(order_of(&v)).or_default() += 1;
        // mixed-radix increment over 0 <= v_i < moduli[i]
        let mut i = 0;
        loop {
            if i == n {
                return Ok(group_from_order_census(&histogram));
            }
            v[i] += 1;
            if v[i] < moduli[i] {
                break;
            }
            v[i] = 0;
            i += 1;
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Rebuilds invariant factors from a histogram `order -> count`.
///
/// For each prime `p`, the number of elements of order dividing `p^k` is
/// `p^(sum_i min(k, e_i))`, which determines how many cyclic `p`-factors
/// have exponent at least `k`.
fn group_from_order_census(histogram: &std::collections::BTreeMap<i128, u64>) -> FiniteAbelianGroup {
    let total: u64 = histogram.values().sum();
    let mut primes = Vec::new();
    let mut rest = total;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            primes.push(p);
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 1;
    }
    if rest > 1 {
        primes.push(rest);
    }
    let mut orders: Vec<BigInt> = Vec::new();
    for p in primes {
        let dividing = |k: u32| -> u64 {
            let pk = (p as i128).pow(k);
            histogram
                .iter()
                .filter(|(o, _)| pk % **o == 0)
                .map(|(_, c)| *c)
                .sum()
        };
        // at_least[k-1] = number of cyclic factors with exponent >= k
        let mut at_least = Vec::new();
        let mut k = 1;
        loop {
            let ratio = dividing(k) / dividing(k - 1);
            if ratio == 1 {
                break;
            }
            at_least.push(ratio.ilog(p) as usize);
            k += 1;
        }
        let count = at_least.first().copied().unwrap_or(0);
        for j in 1..=count {
            let e = at_least.iter().filter(|&&c| c >= j).count() as u32;
            orders.push(BigInt::from(p).pow(e));
        }
    }
    FiniteAbelianGroup::from_cyclic_orders(&orders).expect("prime powers are positive")
}
