//! Finite abelian groups as groups of rational points of abelian varieties
//! over small finite fields.
//!
//! Isogeny classes are described by Weil polynomials ([`weil`]). For
//! square-free classes that are ordinary, or over a prime field without real
//! Frobenius eigenvalues, varieties in the class correspond to fractional
//! ideals `I` of the Frobenius order `Z[π, π̄]`, and the group of rational
//! points is `I / (π - 1) I` ([`orders`]). The [`realize`] module builds
//! certificates exhibiting a prescribed group, which can be re-checked from
//! scratch with [`realize::verify_certificate`].

pub mod math;
pub mod orders;
pub mod realize;
pub mod weil;
