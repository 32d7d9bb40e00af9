use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use fqgroups::math::group::FiniteAbelianGroup;
use fqgroups::math::lattice::{brute_force_group, hnf, quotient_group, snf_invariants, IntegerLattice};
use fqgroups::math::poly::IntPolynomial;
use fqgroups::math::quadratic::QuadraticRingElement;
use fqgroups::math::sturm::sturm_count;
use fqgroups::realize::{nonexistence_check, realize, verify_certificate, NonexistenceOutcome, RealizeOptions};
use fqgroups::weil::{decode_label, encode_label};

fn big(m: Vec<Vec<i64>>) -> Vec<Vec<BigInt>> {
    m.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect()
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    // cofactor expansion; matrices here are at most 4x4
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<BigInt>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
            let term = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

fn square_matrix(n: usize, bound: i64) -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    prop::collection::vec(prop::collection::vec(-bound..=bound, n), n).prop_map(big)
}

/// Random row operations `(target, source, multiplier)` and swaps.
fn unimodular_ops(n: usize) -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0..n, 0..n, -3i64..=3), 0..12)
}

fn apply_ops(m: &mut [Vec<BigInt>], ops: &[(usize, usize, i64)]) {
    for &(i, j, k) in ops {
        if i == j {
            continue;
        }
        if k == 0 {
            m.swap(i, j);
        } else {
            let src = m[j].clone();
            for (a, b) in m[i].iter_mut().zip(src) {
                *a += b * k;
            }
        }
    }
}

fn multiply(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * &r[j]).sum()).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hnf_ignores_unimodular_row_operations(n in 1usize..=4, seed in square_matrix(4, 9), ops in unimodular_ops(4)) {
        let m: Vec<Vec<BigInt>> = seed[..n].iter().map(|r| r[..n].to_vec()).collect();
        prop_assume!(!det(&m).is_zero());
        let ops: Vec<_> = ops.into_iter().filter(|(i, j, _)| *i < n && *j < n).collect();
        let mut moved = m.clone();
        apply_ops(&mut moved, &ops);
        prop_assert_eq!(hnf(&m, n).unwrap(), hnf(&moved, n).unwrap());
    }

    #[test]
    fn snf_product_is_determinant(n in 1usize..=4, seed in square_matrix(4, 12)) {
        let m: Vec<Vec<BigInt>> = seed[..n].iter().map(|r| r[..n].to_vec()).collect();
        let product: BigInt = snf_invariants(&m).iter().product();
        prop_assert_eq!(product, det(&m).abs());
    }

    #[test]
    fn quotient_matches_coset_census(n in 1usize..=3, base in square_matrix(3, 5), change in square_matrix(3, 6)) {
        let base: Vec<Vec<BigInt>> = base[..n].iter().map(|r| r[..n].to_vec()).collect();
        let change: Vec<Vec<BigInt>> = change[..n].iter().map(|r| r[..n].to_vec()).collect();
        let index = det(&change).abs();
        prop_assume!(!det(&base).is_zero() && !index.is_zero() && index <= BigInt::from(10_000));
        let sup = IntegerLattice::from_integer_rows(&base, n).unwrap();
        let sub = IntegerLattice::from_integer_rows(&multiply(&change, &base), n).unwrap();
        let fast = quotient_group(&sup, &sub).unwrap();
        prop_assert_eq!(fast.order(), index);
        prop_assert_eq!(fast, brute_force_group(&sup, &sub, 10_000).unwrap());
    }

    #[test]
    fn sturm_counts_known_roots(roots in prop::collection::vec(-6i64..=6, 1..6), lo in -50i64..50, width in 1i64..60) {
        let f = roots.iter().fold(IntPolynomial::one(), |acc, r| &acc * &IntPolynomial::from_i64s(&[-r, 1]));
        let at = |k: i64| QuadraticRingElement::rational(BigRational::new(k.into(), 5.into()));
        let hi = lo + width;
        let mut distinct = roots.clone();
        distinct.sort();
        distinct.dedup();
        let expected = distinct.iter().filter(|r| lo <= 5 * **r && 5 * **r <= hi).count();
        prop_assert_eq!(sturm_count(&f, &at(lo), &at(hi)), expected);
    }

    #[test]
    fn realized_cyclic_groups_verify(m in 1u64..=60) {
        let g = FiniteAbelianGroup::cyclic(m);
        let cert = realize(&g, 2, &RealizeOptions::default()).unwrap();
        prop_assert!(cert.flags().all_ordinary);
        prop_assert!(verify_certificate(&cert.to_json()).passed());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn labels_round_trip(
        q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49, 121]),
        half in prop::collection::vec(-100_000i64..=100_000, 1..=6),
    ) {
        let g = half.len();
        let half: Vec<BigInt> = half.into_iter().map(BigInt::from).collect();
        let label = encode_label(g, q, &half);
        prop_assert_eq!(decode_label(&label).unwrap(), (g, q, half));
    }
}

fn prime_powers_of(p: u64, limit: u64) -> Vec<u64> {
    std::iter::successors(Some(p), |q| q.checked_mul(p)).take_while(|q| *q <= limit).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// An obstruction at `q` persists at every larger power of the same prime.
    #[test]
    fn obstructions_are_monotone(
        factors in prop::collection::vec(1u64..=12, 1..=3),
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
    ) {
        let orders: Vec<BigInt> = factors.into_iter().map(BigInt::from).collect();
        let g = FiniteAbelianGroup::from_cyclic_orders(&orders).unwrap();
        let obstructed: Vec<bool> = prime_powers_of(p, 1 << 20)
            .into_iter()
            .map(|q| matches!(nonexistence_check(&g, q).unwrap(), NonexistenceOutcome::Obstructed(_)))
            .collect();
        for w in obstructed.windows(2) {
            prop_assert!(!w[0] || w[1]);
        }
    }
}
