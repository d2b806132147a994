use thiserror::Error;

use crate::spin::Spin;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a structural precondition (e.g. det ≠ 1).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spin mismatch: expected {expected}, found {found}")]
    SpinMismatch { expected: Spin, found: Spin },

    #[error("quadrature convergence gate failed: {0}")]
    QuadratureGate(String),

    #[error("amplitude has no analytic gradient and finite-difference fallback is disabled")]
    MissingGradient,

    /// A closed-form kernel is only known for a subset of spins.
    #[error("no closed form for spin {0}; use the numeric path")]
    NoClosedForm(Spin),
}
