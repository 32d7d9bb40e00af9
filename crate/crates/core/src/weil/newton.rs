//! `p`-adic Newton polygons of integer polynomials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::math::poly::IntPolynomial;

/// One edge of the lower convex hull, from `x^start` to `x^end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonSegment {
    pub start: usize,
    pub end: usize,
    pub slope: BigRational,
}

fn valuation(c: &BigInt, p: &BigInt) -> u64 {
    let mut n = c.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Lower convex hull of the points `(i, v_p(c_i))` over nonzero coefficients
/// `c_i` of `x^i`.
pub fn lower_newton_polygon(f: &IntPolynomial, p: u64) -> Vec<NewtonSegment> {
    let pb = BigInt::from(p);
    let points: Vec<(i64, i64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, valuation(c, &pb) as i64))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for pt in points {
        while hull.len() >= 2 {
            let (ax, ay) = hull[hull.len() - 2];
            let (bx, by) = hull[hull.len() - 1];
            // drop b when it lies on or above the segment a -> pt
            let cross = (bx - ax) * (pt.1 - ay) - (by - ay) * (pt.0 - ax);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.windows(2)
        .map(|w| NewtonSegment {
            start: w[0].0 as usize,
            end: w[1].0 as usize,
            slope: BigRational::new(BigInt::from(w[1].1 - w[0].1), BigInt::from(w[1].0 - w[0].0)),
        })
        .collect()
}

/// Number of roots that are `p`-adic units: the width of the slope-zero part
/// of the Newton polygon. For a Weil polynomial this is the `p`-rank.
pub fn newton_polygon_p_rank(f: &IntPolynomial, p: u64) -> usize {
    lower_newton_polygon(f, p)
        .iter()
        .filter(|s| s.slope.is_zero())
        .map(|s| s.end - s.start)
        .sum()
}
