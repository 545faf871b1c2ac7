//! Exact arithmetic kernel: Gaussian rationals, weighted polynomials, linear algebra.

mod gaussian;
pub mod linalg;
mod vars;
mod wpoly;

pub use gaussian::{GaussianRational, ParseGaussianError};
pub use vars::{VarKind, Variable, VariableTable};
pub use wpoly::{Monomial, WPoly, WeightClass};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("variable {0} has no binding and no counterpart in the target table")]
    UnboundVariable(String),
    #[error("binding polynomials live over a different variable table")]
    TableMismatch,
}
