//! Exact coefficient arithmetic and the polynomial engine.

pub mod cyclotomic;
pub mod exterior;
pub mod field;
pub mod groebner;
pub mod linalg;
pub mod lp;
pub mod parse;
pub mod poly;
pub mod rational;

pub use cyclotomic::{CyclotomicField, CyclotomicNumber};
pub use exterior::Form;
pub use field::Field;
pub use groebner::{groebner_basis, PolyIdeal, QuotientBasis};
pub use linalg::Matrix;
pub use lp::{cone_membership, ConeMembership};
pub use parse::{parse_number, parse_poly, parse_poly_infer};
pub use poly::{Coeff, Monomial, MultiPoly};
pub use rational::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable sets differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singularity is not isolated (Jacobian ring is infinite-dimensional)")]
    NonIsolated,
    #[error("polynomial is not quasi-homogeneous: {0}")]
    NotQuasiHomogeneous(String),
}
