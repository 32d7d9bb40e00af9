//! Finite abelian groups in invariant-factor form.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::arith::{factor, factor_u64};
use super::lattice::snf_invariants;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invariant factor {0} is smaller than 2")]
    FactorTooSmall(BigInt),
    #[error("invariant factors {0} and {1} violate the divisibility chain")]
    NotAChain(BigInt, BigInt),
    #[error("cyclic orders must be positive, got {0}")]
    NonPositiveOrder(BigInt),
}

/// `Z/d_1 × … × Z/d_k` with `d_1 | d_2 | … | d_k` and every `d_i ≥ 2`.
///
/// The empty list is the trivial group. Two groups are isomorphic exactly
/// when their factor lists are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteAbelianGroup {
    invariant_factors: Vec<BigInt>,
}

impl FiniteAbelianGroup {
    pub fn new(invariant_factors: Vec<BigInt>) -> Result<Self, GroupError> {
        for d in &invariant_factors {
            if d < &BigInt::from(2) {
                return Err(GroupError::FactorTooSmall(d.clone()));
            }
        }
        for w in invariant_factors.windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return Err(GroupError::NotAChain(w[0].clone(), w[1].clone()));
            }
        }
        Ok(FiniteAbelianGroup { invariant_factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { invariant_factors: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_cyclic_orders(&[BigInt::from(n)]).expect("positive order")
    }

    /// Normalizes an arbitrary product `Z/n_1 × … × Z/n_r` (orders ≥ 1)
    /// to invariant factors.
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Result<Self, GroupError> {
        if let Some(bad) = orders.iter().find(|n| !n.is_positive()) {
            return Err(GroupError::NonPositiveOrder(bad.clone()));
        }
        let diag: Vec<Vec<BigInt>> = (0..orders.len())
            .map(|i| {
                (0..orders.len())
                    .map(|j| if i == j { orders[i].clone() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        Ok(Self::from_snf_diagonal(&snf_invariants(&diag)))
    }

    /// Drops unit entries of a Smith normal form diagonal.
    pub(crate) fn from_snf_diagonal(diag: &[BigInt]) -> Self {
        let invariant_factors = diag.iter().filter(|d| !d.is_one()).cloned().collect();
        FiniteAbelianGroup { invariant_factors }
    }

    pub fn from_u64s(factors: &[u64]) -> Result<Self, GroupError> {
        Self::new(factors.iter().map(|&d| BigInt::from(d)).collect())
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    /// Largest invariant factor (1 for the trivial group).
    pub fn exponent(&self) -> BigInt {
        self.invariant_factors.last().cloned().unwrap_or_else(BigInt::one)
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariant_factors.len() <= 1
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn direct_product(&self, other: &Self) -> Self {
        let mut orders = self.invariant_factors.clone();
        orders.extend(other.invariant_factors.iter().cloned());
        Self::from_cyclic_orders(&orders).expect("factors are positive")
    }

    /// Primary decomposition: prime-power cyclic orders, sorted by prime
    /// and then by size.
    pub fn primary_decomposition(&self) -> Vec<BigInt> {
        let mut by_prime: BTreeMap<BigUint, Vec<BigInt>> = BTreeMap::new();
        for d in &self.invariant_factors {
            let f = factor(d.magnitude()).expect("nonzero invariant factor");
            for (p, e) in f {
                let pp = BigInt::from(p.pow(e));
                by_prime.entry(p).or_default().push(pp);
            }
        }
        by_prime
            .into_values()
            .flat_map(|mut v| {
                v.sort();
                v
            })
            .collect()
    }

    /// Whether the order is a power of the prime `p` (the trivial group counts).
    pub fn is_p_group(&self, p: u64) -> bool {
        let mut n = self.order();
        let pb = BigInt::from(p);
        while !n.is_one() {
            let (q, r) = n.div_rem(&pb);
            if !r.is_zero() {
                return false;
            }
            n = q;
        }
        true
    }
}

impl TryFrom<Vec<BigInt>> for FiniteAbelianGroup {
    type Error = GroupError;
    fn try_from(v: Vec<BigInt>) -> Result<Self, GroupError> {
        Self::new(v)
    }
}

impl From<FiniteAbelianGroup> for Vec<BigInt> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.invariant_factors
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "trivial");
        }
        let parts: Vec<String> = self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            prefix.push(k);
            go(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// All isomorphism classes of abelian groups of order `n`, sorted.
///
/// The count is the product of partition numbers of the prime exponents.
pub fn enumerate_abelian_groups(n: u64) -> Vec<FiniteAbelianGroup> {
    assert!(n >= 1, "group order must be positive");
    let mut groups = vec![Vec::<BigInt>::new()];
    for (p, e) in factor_u64(n) {
        let mut next = Vec::new();
        for orders in &groups {
            for part in partitions(e) {
                let mut o = orders.clone();
                o.extend(part.iter().map(|&k| BigInt::from(p).pow(k)));
                next.push(o);
            }
        }
        groups = next;
    }
    let mut out: Vec<FiniteAbelianGroup> = groups
        .iter()
        .map(|o| FiniteAbelianGroup::from_cyclic_orders(o).expect("positive orders"))
        .collect();
    out.sort_by(|a, b| {
        a.rank()
            .cmp(&b.rank())
            .then_with(|| a.invariant_factors.cmp(&b.invariant_factors))
    });
    out
}

/// Converts a group order to `u64` when it fits.
pub fn order_u64(g: &FiniteAbelianGroup) -> Option<u64> {
    g.order().to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::from_u64s(f).unwrap()
    }

    fn ints(v: &[u64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn chain_validation() {
        assert!(FiniteAbelianGroup::from_u64s(&[2, 3]).is_err());
        assert!(FiniteAbelianGroup::from_u64s(&[1]).is_err());
        assert!(FiniteAbelianGroup::from_u64s(&[2, 4]).is_ok());
    }

    #[test]
    fn crt_normalization() {
        let g = FiniteAbelianGroup::from_cyclic_orders(&ints(&[4, 3])).unwrap();
        assert_eq!(g, grp(&[12]));
        let g = FiniteAbelianGroup::from_cyclic_orders(&ints(&[6, 4, 1])).unwrap();
        assert_eq!(g, grp(&[2, 12]));
        assert_eq!(FiniteAbelianGroup::from_cyclic_orders(&ints(&[1, 1])).unwrap(), FiniteAbelianGroup::trivial());
    }

    #[test]
    fn primary_decomposition_examples() {
        assert_eq!(grp(&[12]).primary_decomposition(), ints(&[4, 3]));
        assert_eq!(grp(&[2, 2]).primary_decomposition(), ints(&[2, 2]));
        assert_eq!(grp(&[6, 12]).primary_decomposition(), ints(&[2, 4, 3, 3]));
        assert!(FiniteAbelianGroup::trivial().primary_decomposition().is_empty());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_abelian_groups(8), vec![grp(&[8]), grp(&[2, 4]), grp(&[2, 2, 2])]);
        assert_eq!(enumerate_abelian_groups(6), vec![grp(&[6])]);
        assert_eq!(enumerate_abelian_groups(36).len(), 4);
        assert_eq!(enumerate_abelian_groups(1), vec![FiniteAbelianGroup::trivial()]);
        // p(4) * p(2) = 5 * 2
        assert_eq!(enumerate_abelian_groups(16 * 9).len(), 10);
    }

    #[test]
    fn p_groups() {
        assert!(grp(&[3, 9]).is_p_group(3));
        assert!(!grp(&[15]).is_p_group(3));
        assert!(FiniteAbelianGroup::trivial().is_p_group(3));
    }
}
