//! Orders and fractional ideals in the étale algebra `K = Q[x]/(f)` of a
//! square-free Weil polynomial.
//!
//! Everything is a lattice in the power basis `1, x, …, x^{n-1}` of `K`,
//! where `n = 2g`. A variety in a square-free ordinary (or CS) class is
//! represented by a fractional ideal `I`, and its group of rational points
//! is `I / (π - 1) I`.

mod saturate;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::math::arith::FactorError;
use crate::math::group::FiniteAbelianGroup;
use crate::math::lattice::{quotient_group, IntMatrix, IntegerLattice, LatticeError};
use crate::math::poly::{is_squarefree, IntPolynomial, RatPolynomial};
use crate::weil::{validate, WeilError, WeilPolynomial};

pub use saturate::{
    characteristic_polynomial, maximal_order, p_saturate, trace_form_disc, DEFAULT_CANDIDATE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("Weil polynomial is not square-free")]
    NotSquareFree,
    #[error("element does not preserve the lattice")]
    NotStable,
    #[error("lattice is not a ring containing 1, π and π̄")]
    NotAnOrder,
    #[error("f(1) = 0, so π - 1 is not invertible")]
    DegenerateFrobenius,
    #[error("Weil polynomials of parts {0} and {1} share a factor")]
    NotCoprime(usize, usize),
    #[error("ideals belong to different orders")]
    DifferentOrders,
    #[error("part {0}: polynomial does not match the ideal's algebra")]
    PartMismatch(usize),
    #[error("{p}^{n} saturation candidates exceed the cap {cap}")]
    CandidateSpaceTooLarge { p: u64, n: usize, cap: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Weil(#[from] WeilError),
}

/// An element of `K`, stored as its reduced residue modulo `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    residue: RatPolynomial,
}

impl AlgebraElement {
    pub fn residue(&self) -> &RatPolynomial {
        &self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }
}

/// `K = Q[x]/(f)` for a square-free Weil polynomial `f`: a product of
/// number fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaleAlgebra {
    weil: WeilPolynomial,
    modulus: RatPolynomial,
    /// `Tr(x^k)` for `k < n`.
    power_traces: Vec<BigInt>,
}

impl EtaleAlgebra {
    pub fn new(weil: WeilPolynomial) -> Result<Self, OrderError> {
        if !is_squarefree(weil.poly()) {
            return Err(OrderError::NotSquareFree);
        }
        let modulus = weil.poly().to_rational();
        let power_traces = power_sums(weil.poly());
        Ok(EtaleAlgebra { weil, modulus, power_traces })
    }

    pub fn weil(&self) -> &WeilPolynomial {
        &self.weil
    }

    /// Dimension `2g` over `Q`.
    pub fn degree(&self) -> usize {
        2 * self.weil.dimension()
    }

    pub fn element(&self, p: &RatPolynomial) -> AlgebraElement {
        AlgebraElement { residue: p.rem(&self.modulus) }
    }

    pub fn from_int_poly(&self, p: &IntPolynomial) -> AlgebraElement {
        self.element(&p.to_rational())
    }

    pub fn from_coordinates(&self, v: &[BigRational]) -> AlgebraElement {
        assert_eq!(v.len(), self.degree(), "coordinate vector length");
        self.element(&RatPolynomial::new(v.to_vec()))
    }

    pub fn coordinates(&self, e: &AlgebraElement) -> Vec<BigRational> {
        (0..self.degree()).map(|i| e.residue.coeff(i)).collect()
    }

    pub fn rational(&self, c: BigRational) -> AlgebraElement {
        self.element(&RatPolynomial::new(vec![c]))
    }

    pub fn one(&self) -> AlgebraElement {
        self.rational(BigRational::one())
    }

    /// Frobenius, the class of `x`.
    pub fn pi(&self) -> AlgebraElement {
        self.from_int_poly(&IntPolynomial::x())
    }

    /// Verschiebung `π̄ = q·π^{-1}`.
    pub fn pi_bar(&self) -> AlgebraElement {
        let inv = self.inverse(&self.pi()).expect("f(0) is nonzero");
        self.scale(&inv, &BigRational::from_integer(BigInt::from(self.weil.q())))
    }

    pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { residue: &a.residue + &b.residue }
    }

    pub fn sub(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { residue: &a.residue - &b.residue }
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        self.element(&(&a.residue * &b.residue))
    }

    pub fn scale(&self, a: &AlgebraElement, c: &BigRational) -> AlgebraElement {
        AlgebraElement { residue: a.residue.scale(c) }
    }

    /// Inverse via the extended Euclidean algorithm; `None` for zero
    /// divisors.
    pub fn inverse(&self, a: &AlgebraElement) -> Option<AlgebraElement> {
        let (g, s, _) = a.residue.extended_gcd(&self.modulus);
        (g.degree() == Some(0)).then(|| self.element(&s))
    }

    pub fn trace(&self, a: &AlgebraElement) -> BigRational {
        a.residue
            .coeffs()
            .iter()
            .zip(&self.power_traces)
            .map(|(c, s)| c * BigRational::from_integer(s.clone()))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }
}

/// Power sums `s_k = Σ α^k` for `k < deg f` by Newton's identities.
fn power_sums(f: &IntPolynomial) -> Vec<BigInt> {
    let n = f.degree().unwrap();
    // f = x^n + c_{n-1} x^{n-1} + … + c_0
    let c = |i: usize| f.coeff(i);
    let mut s = vec![BigInt::from(n)];
    for k in 1..n {
        let mut v = -BigInt::from(k) * c(n - k);
        for i in 1..k {
            v -= c(n - i) * &s[k - i];
        }
        s.push(v);
    }
    s
}

/// An order of `K` containing `π` and `π̄`: the Frobenius order `Z[π, π̄]`
/// or one of its overorders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusOrder {
    algebra: Arc<EtaleAlgebra>,
    lattice: IntegerLattice,
}

impl FrobeniusOrder {
    /// Checks that `lattice` contains `1, π, π̄` and is closed under
    /// multiplication.
    pub fn from_lattice(algebra: Arc<EtaleAlgebra>, lattice: IntegerLattice) -> Result<Self, OrderError> {
        let n = algebra.degree();
        if lattice.ambient_rank() != n {
            return Err(LatticeError::DimensionMismatch { found: lattice.ambient_rank(), expected: n }.into());
        }
        for e in [algebra.one(), algebra.pi(), algebra.pi_bar()] {
            if !lattice.contains_vector(&algebra.coordinates(&e)) {
                return Err(OrderError::NotAnOrder);
            }
        }
        let basis = elements_of(&algebra, &lattice);
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i..] {
                if !lattice.contains_vector(&algebra.coordinates(&algebra.mul(a, b))) {
                    return Err(OrderError::NotAnOrder);
                }
            }
        }
        Ok(FrobeniusOrder { algebra, lattice })
    }

    pub(crate) fn from_trusted(algebra: Arc<EtaleAlgebra>, lattice: IntegerLattice) -> Self {
        FrobeniusOrder { algebra, lattice }
    }

    pub fn algebra(&self) -> &Arc<EtaleAlgebra> {
        &self.algebra
    }

    pub fn lattice(&self) -> &IntegerLattice {
        &self.lattice
    }

    pub fn basis_elements(&self) -> Vec<AlgebraElement> {
        elements_of(&self.algebra, &self.lattice)
    }

    pub fn contains(&self, e: &AlgebraElement) -> bool {
        self.lattice.contains_vector(&self.algebra.coordinates(e))
    }

    /// Whether `self ⊆ other` as lattices in the same algebra.
    pub fn is_suborder_of(&self, other: &FrobeniusOrder) -> bool {
        self.algebra == other.algebra && other.lattice.contains(&self.lattice)
    }
}

fn elements_of(algebra: &EtaleAlgebra, lattice: &IntegerLattice) -> Vec<AlgebraElement> {
    lattice.rational_rows().iter().map(|r| algebra.from_coordinates(r)).collect()
}

/// Smallest lattice containing `generators` and closed under
/// multiplication.
pub(crate) fn ring_closure(algebra: &EtaleAlgebra, generators: Vec<Vec<BigRational>>) -> Result<IntegerLattice, LatticeError> {
    let n = algebra.degree();
    let mut lattice = IntegerLattice::from_rational_rows(&generators, n)?;
    loop {
        let basis = elements_of(algebra, &lattice);
        let mut rows = lattice.rational_rows();
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i..] {
                rows.push(algebra.coordinates(&algebra.mul(a, b)));
            }
        }
        let next = IntegerLattice::from_rational_rows(&rows, n)?;
        if next == lattice {
            return Ok(lattice);
        }
        lattice = next;
    }
}

/// `Z[π, π̄]`, spanned by `π^i` for `i < 2g` and `π̄^j` for `1 ≤ j < 2g`.
pub fn frobenius_order(w: &WeilPolynomial) -> Result<FrobeniusOrder, OrderError> {
    let algebra = Arc::new(EtaleAlgebra::new(w.clone())?);
    let n = algebra.degree();
    let pi = algebra.pi();
    let pi_bar = algebra.pi_bar();
    let mut rows = Vec::with_capacity(2 * n);
    let mut power = algebra.one();
    for _ in 0..n {
        rows.push(algebra.coordinates(&power));
        power = algebra.mul(&power, &pi);
    }
    let mut power = pi_bar.clone();
    for _ in 1..n {
        rows.push(algebra.coordinates(&power));
        power = algebra.mul(&power, &pi_bar);
    }
    let lattice = IntegerLattice::from_rational_rows(&rows, n)?;
    FrobeniusOrder::from_lattice(algebra, lattice)
}

/// Matrix of multiplication by `e` in the basis of `lattice`: row `i` holds
/// the coordinates of `e·b_i`.
pub fn multiplication_matrix_on(
    algebra: &EtaleAlgebra,
    lattice: &IntegerLattice,
    e: &AlgebraElement,
) -> Result<IntMatrix, OrderError> {
    elements_of(algebra, lattice)
        .iter()
        .map(|b| {
            lattice
                .coordinates(&algebra.coordinates(&algebra.mul(e, b)))
                .ok_or(OrderError::NotStable)
        })
        .collect()
}

pub fn multiplication_matrix(o: &FrobeniusOrder, e: &AlgebraElement) -> Result<IntMatrix, OrderError> {
    multiplication_matrix_on(&o.algebra, &o.lattice, e)
}

/// A full-rank lattice of `K` stable under an order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalIdeal {
    order: FrobeniusOrder,
    lattice: IntegerLattice,
}

impl FractionalIdeal {
    pub fn new(order: FrobeniusOrder, lattice: IntegerLattice) -> Result<Self, OrderError> {
        let algebra = order.algebra();
        if lattice.ambient_rank() != algebra.degree() {
            return Err(LatticeError::DimensionMismatch {
                found: lattice.ambient_rank(),
                expected: algebra.degree(),
            }
            .into());
        }
        for b in order.basis_elements() {
            multiplication_matrix_on(algebra, &lattice, &b)?;
        }
        Ok(FractionalIdeal { order, lattice })
    }

    /// The order itself as an ideal over itself.
    pub fn unit(order: &FrobeniusOrder) -> Self {
        FractionalIdeal { order: order.clone(), lattice: order.lattice.clone() }
    }

    /// `α·O` for an invertible `α`.
    pub fn principal(order: &FrobeniusOrder, alpha: &AlgebraElement) -> Result<Self, OrderError> {
        let algebra = order.algebra();
        if algebra.inverse(alpha).is_none() {
            return Err(OrderError::NotStable);
        }
        let rows: Vec<_> = order
            .basis_elements()
            .iter()
            .map(|b| algebra.coordinates(&algebra.mul(alpha, b)))
            .collect();
        let lattice = IntegerLattice::from_rational_rows(&rows, algebra.degree())?;
        Ok(FractionalIdeal { order: order.clone(), lattice })
    }

    pub fn order(&self) -> &FrobeniusOrder {
        &self.order
    }

    pub fn lattice(&self) -> &IntegerLattice {
        &self.lattice
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        FractionalIdeal { order: self.order.clone(), lattice: self.lattice.scale(c) }
    }

    /// `e·I` as a lattice.
    pub fn times_element(&self, e: &AlgebraElement) -> Result<IntegerLattice, OrderError> {
        let algebra = self.order.algebra();
        let rows: Vec<_> = elements_of(algebra, &self.lattice)
            .iter()
            .map(|b| algebra.coordinates(&algebra.mul(e, b)))
            .collect();
        Ok(IntegerLattice::from_rational_rows(&rows, algebra.degree())?)
    }

    /// `I / (π - 1) I`.
    pub fn group_of_points(&self) -> Result<FiniteAbelianGroup, OrderError> {
        group_of_points(self)
    }
}

impl fmt::Display for FractionalIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(1/{}) {:?}", self.lattice.denominator(), self.lattice.basis())
    }
}

/// `I / (π - 1) I`, of order `|f(1)|`.
pub fn group_of_points(i: &FractionalIdeal) -> Result<FiniteAbelianGroup, OrderError> {
    let algebra = i.order.algebra();
    if algebra.weil().point_count().is_zero() {
        return Err(OrderError::DegenerateFrobenius);
    }
    let pi_minus_one = algebra.sub(&algebra.pi(), &algebra.one());
    let sub = i.times_element(&pi_minus_one)?;
    Ok(quotient_group(&i.lattice, &sub)?)
}

/// Whether `π̄` acts on `I / (π - 1) I` as multiplication by `q`.
pub fn verschiebung_acts_as_q(i: &FractionalIdeal) -> Result<bool, OrderError> {
    let algebra = i.order.algebra();
    let q = BigRational::from_integer(BigInt::from(algebra.weil().q()));
    let pi_minus_one = algebra.sub(&algebra.pi(), &algebra.one());
    let sub = i.times_element(&pi_minus_one)?;
    let shift = algebra.sub(&algebra.pi_bar(), &algebra.rational(q));
    Ok(elements_of(algebra, &i.lattice)
        .iter()
        .all(|b| sub.contains_vector(&algebra.coordinates(&algebra.mul(&shift, b)))))
}

/// `I·J`, spanned by all products of basis elements.
pub fn ideal_product(a: &FractionalIdeal, b: &FractionalIdeal) -> Result<FractionalIdeal, OrderError> {
    if a.order != b.order {
        return Err(OrderError::DifferentOrders);
    }
    let algebra = a.order.algebra();
    let ea = elements_of(algebra, &a.lattice);
    let eb = elements_of(algebra, &b.lattice);
    let rows: Vec<_> = ea
        .iter()
        .flat_map(|x| eb.iter().map(move |y| algebra.coordinates(&algebra.mul(x, y))))
        .collect();
    let lattice = IntegerLattice::from_rational_rows(&rows, algebra.degree())?;
    Ok(FractionalIdeal { order: a.order.clone(), lattice })
}

/// Glues ideals of pairwise coprime classes into one ideal of
/// `Q[x]/(f_1 ⋯ f_r) ≅ ∏ Q[x]/(f_i)`, embedding each part along its CRT
/// idempotent. The group of points of the result is the product of the
/// parts' groups.
pub fn product_algebra_assemble(
    parts: &[(WeilPolynomial, FractionalIdeal)],
) -> Result<(WeilPolynomial, FractionalIdeal), OrderError> {
    assert!(!parts.is_empty(), "nothing to assemble");
    for (k, (w, ideal)) in parts.iter().enumerate() {
        if ideal.order.algebra().weil() != w {
            return Err(OrderError::PartMismatch(k));
        }
    }
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let g = parts[i].0.poly().to_rational().gcd(&parts[j].0.poly().to_rational());
            if g.degree() != Some(0) {
                return Err(OrderError::NotCoprime(i, j));
            }
        }
    }
    let product = parts.iter().fold(IntPolynomial::one(), |acc, (w, _)| &acc * w.poly());
    let q = parts[0].0.q();
    let weil = validate(&product.descending(), q)?;
    let algebra = Arc::new(EtaleAlgebra::new(weil.clone())?);
    let mut order_rows = Vec::new();
    let mut ideal_rows = Vec::new();
    for (w, ideal) in parts {
        let cofactor = product.div_exact(w.poly()).expect("factor of the product").to_rational();
        let (_, u, _) = cofactor.extended_gcd(&w.poly().to_rational());
        let idempotent = algebra.element(&(&cofactor * &u));
        let part_algebra = ideal.order.algebra();
        let embed = |lattice: &IntegerLattice| -> Vec<Vec<BigRational>> {
            elements_of(part_algebra, lattice)
                .iter()
                .map(|e| algebra.coordinates(&algebra.mul(&algebra.element(e.residue()), &idempotent)))
                .collect()
        };
        order_rows.extend(embed(&ideal.order.lattice));
        ideal_rows.extend(embed(&ideal.lattice));
    }
    let n = algebra.degree();
    let order_lattice = IntegerLattice::from_rational_rows(&order_rows, n)?;
    let order = FrobeniusOrder::from_lattice(algebra, order_lattice)?;
    let ideal = FractionalIdeal::new(order, IntegerLattice::from_rational_rows(&ideal_rows, n)?)?;
    Ok((weil, ideal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::validate_i64;

    fn weil(c: &[i64], q: u64) -> WeilPolynomial {
        validate_i64(c, q).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::from_u64s(f).unwrap()
    }

    #[test]
    fn frobenius_order_of_elliptic_curves() {
        for (c, q) in [(&[1, 1, 2][..], 2), (&[1, -2, 4][..], 4)] {
            let o = frobenius_order(&weil(c, q)).unwrap();
            assert_eq!(o.lattice(), &IntegerLattice::standard(2));
        }
        let o = frobenius_order(&weil(&[1, 1, 2], 2)).unwrap();
        let a = o.algebra();
        // π̄ = -1 - π
        assert_eq!(a.coordinates(&a.pi_bar()), vec![BigRational::from_integer((-1).into()); 2]);
    }

    #[test]
    fn not_square_free() {
        assert_eq!(frobenius_order(&weil(&[1, 0, -4, 0, 4], 2)), Err(OrderError::NotSquareFree));
    }

    #[test]
    fn multiplication_matrices() {
        let o = frobenius_order(&weil(&[1, 1, 2], 2)).unwrap();
        let a = o.algebra().clone();
        assert_eq!(
            multiplication_matrix(&o, &a.one()).unwrap(),
            vec![ints(&[1, 0]), ints(&[0, 1])]
        );
        let m = multiplication_matrix(&o, &a.sub(&a.pi(), &a.one())).unwrap();
        assert_eq!(m, vec![ints(&[-1, 1]), ints(&[-2, -2])]);
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        assert_eq!(det, BigInt::from(4));
        let q = multiplication_matrix(&o, &a.mul(&a.pi(), &a.pi_bar())).unwrap();
        assert_eq!(q, vec![ints(&[2, 0]), ints(&[0, 2])]);
        let half = a.rational(BigRational::new(1.into(), 2.into()));
        assert_eq!(multiplication_matrix(&o, &half), Err(OrderError::NotStable));
    }

    #[test]
    fn groups_of_points() {
        let o = frobenius_order(&weil(&[1, 1, 2], 2)).unwrap();
        let unit = FractionalIdeal::unit(&o);
        assert_eq!(group_of_points(&unit).unwrap(), grp(&[4]));
        assert!(verschiebung_acts_as_q(&unit).unwrap());
        let quartic = weil(&[1, -3, 7, -12, 16], 4);
        let o = frobenius_order(&quartic).unwrap();
        assert_eq!(group_of_points(&FractionalIdeal::unit(&o)).unwrap(), grp(&[9]));
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(group_of_points(&FractionalIdeal::unit(&o).scale(&third)).unwrap(), grp(&[9]));
    }

    #[test]
    fn products_of_ideals() {
        let o = frobenius_order(&weil(&[1, 1, 2], 2)).unwrap();
        let a = o.algebra().clone();
        let alpha = a.add(&a.pi(), &a.rational(BigRational::from_integer(3.into())));
        let beta = a.sub(&a.mul(&a.pi(), &a.pi()), &a.one());
        let pa = FractionalIdeal::principal(&o, &alpha).unwrap();
        let pb = FractionalIdeal::principal(&o, &beta).unwrap();
        let pab = FractionalIdeal::principal(&o, &a.mul(&alpha, &beta)).unwrap();
        assert_eq!(ideal_product(&pa, &pb).unwrap(), pab);
        let unit = FractionalIdeal::unit(&o);
        assert_eq!(ideal_product(&pa, &unit).unwrap(), pa);
        let c = BigRational::new(5.into(), 3.into());
        assert_eq!(ideal_product(&pa.scale(&c), &pb).unwrap(), ideal_product(&pa, &pb).unwrap().scale(&c));
    }

    #[test]
    fn assembled_groups_multiply() {
        let unit = |c: &[i64]| {
            let w = weil(c, 2);
            let o = frobenius_order(&w).unwrap();
            (w, FractionalIdeal::unit(&o))
        };
        // x^2 + x + 2 has 4 points, x^2 + 2 has 3
        let (w, ideal) = product_algebra_assemble(&[unit(&[1, 1, 2]), unit(&[1, 0, 2])]).unwrap();
        assert_eq!(w.poly(), &(&IntPolynomial::from_i64s(&[2, 1, 1]) * &IntPolynomial::from_i64s(&[2, 0, 1])));
        assert_eq!(group_of_points(&ideal).unwrap(), grp(&[12]));
        let product_order = frobenius_order(&w).unwrap();
        assert!(product_order.is_suborder_of(ideal.order()));
        // two classes with 2 points each
        let hits = crate::weil::search_with_point_count(
            2,
            &BigInt::from(2),
            2,
            crate::weil::Requirements::square_free_ordinary(),
            crate::weil::SearchLimit::First(2),
        )
        .unwrap()
        .hits;
        let parts: Vec<_> = hits
            .iter()
            .map(|w| (w.clone(), FractionalIdeal::unit(&frobenius_order(w).unwrap())))
            .collect();
        let (_, ideal) = product_algebra_assemble(&parts).unwrap();
        assert_eq!(group_of_points(&ideal).unwrap(), grp(&[2, 2]));
        assert!(matches!(
            product_algebra_assemble(&[unit(&[1, 1, 2]), unit(&[1, 1, 2])]),
            Err(OrderError::NotCoprime(0, 1))
        ));
    }
}
