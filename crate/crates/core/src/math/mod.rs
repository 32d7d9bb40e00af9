//! Exact integer and rational kernels: polynomials, lattices, Smith and
//! Hermite normal forms, Sturm sequences, finite abelian groups.

pub mod arith;
pub mod group;
pub mod lattice;
pub mod poly;
pub mod quadratic;
pub mod sturm;

pub use group::{enumerate_abelian_groups, FiniteAbelianGroup, GroupError};
pub use lattice::{
    brute_force_group, hnf, quotient_group, snf_invariants, IntMatrix, IntegerLattice, LatticeError,
};
pub use poly::{squarefree_part, IntPolynomial, RatPolynomial};
pub use quadratic::QuadraticRingElement;
pub use sturm::sturm_count;
