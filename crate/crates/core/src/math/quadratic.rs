//! Exact elements `a + b·√d` of a real quadratic field, used for evaluating
//! polynomials at the irrational endpoints `±2√q`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::RatPolynomial;

/// `a + b·√radicand` with `radicand` square-free.
///
/// Rational values are normalized to `b = 0, radicand = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticRingElement {
    a: BigRational,
    b: BigRational,
    radicand: BigInt,
}

/// Splits `n > 0` as `s^2 · d` with `d` square-free.
fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut d = BigInt::one();
    let mut rest = n.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            d *= &p;
        }
        p += 1;
    }
    (s, d * rest)
}

impl QuadraticRingElement {
    pub fn new(a: BigRational, b: BigRational, radicand: BigInt) -> Self {
        assert!(radicand.is_positive(), "radicand must be positive");
        let (s, d) = square_split(&radicand);
        let b = b * BigRational::from_integer(s);
        if d.is_one() || b.is_zero() {
            QuadraticRingElement {
                a: a + b,
                b: BigRational::zero(),
                radicand: BigInt::one(),
            }
        } else {
            QuadraticRingElement { a, b, radicand: d }
        }
    }

    pub fn rational(a: BigRational) -> Self {
        Self::new(a, BigRational::zero(), BigInt::one())
    }

    pub fn from_integer(a: i64) -> Self {
        Self::rational(BigRational::from_integer(a.into()))
    }

    /// `c·√n`.
    pub fn sqrt_multiple(c: i64, n: &BigInt) -> Self {
        Self::new(
            BigRational::zero(),
            BigRational::from_integer(c.into()),
            n.clone(),
        )
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        QuadraticRingElement {
            a: self.a.clone(),
            b: -&self.b,
            radicand: self.radicand.clone(),
        }
    }

    fn common_radicand(&self, other: &Self) -> BigInt {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => other.radicand.clone(),
            (_, true) => self.radicand.clone(),
            _ => {
                assert_eq!(self.radicand, other.radicand, "mixed quadratic fields");
                self.radicand.clone()
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.common_radicand(other);
        Self::new(&self.a + &other.a, &self.b + &other.b, d)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuadraticRingElement {
            a: -&self.a,
            b: -&self.b,
            radicand: self.radicand.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.common_radicand(other);
        let dr = BigRational::from_integer(d.clone());
        Self::new(
            &self.a * &other.a + &self.b * &other.b * dr,
            &self.a * &other.b + &self.b * &other.a,
            d,
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::from_integer(1), |acc, _| acc.mul(self))
    }

    /// Exact sign, by comparing `a^2` against `b^2·d` where the signs of `a`
    /// and `b` disagree.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (_, Ordering::Equal) => sa,
            (Ordering::Equal, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(self.radicand.clone());
                if sa == Ordering::Greater {
                    a2.cmp(&b2d)
                } else {
                    b2d.cmp(&a2)
                }
            }
        }
    }

    /// Monic minimal polynomial over the rationals (degree 1 or 2).
    pub fn minimal_polynomial(&self) -> RatPolynomial {
        if self.is_rational() {
            return RatPolynomial::new(vec![-self.a.clone(), BigRational::one()]);
        }
        // (x - a)^2 - b^2 d
        let d = BigRational::from_integer(self.radicand.clone());
        RatPolynomial::new(vec![
            &self.a * &self.a - &self.b * &self.b * d,
            -(&self.a + &self.a),
            BigRational::one(),
        ])
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let d = self.radicand.to_f64().unwrap_or(f64::NAN);
        a + b * d.sqrt()
    }
}

impl PartialOrd for QuadraticRingElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticRingElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum()
    }
}

impl fmt::Display for QuadraticRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt({})", self.b, self.radicand)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.radicand)
        }
    }
}

/// Exact value of `p` at `x`.
pub fn eval_at(p: &RatPolynomial, x: &QuadraticRingElement) -> QuadraticRingElement {
    let zero = QuadraticRingElement::rational(BigRational::zero());
    p.coeffs().iter().rev().fold(zero, |acc, c| {
        acc.mul(x).add(&QuadraticRingElement::rational(c.clone()))
    })
}
