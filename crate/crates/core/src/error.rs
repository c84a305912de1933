use thiserror::Error;

/// Errors raised by model construction, diagonalization and landscape analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("representation inconsistent: {0}")]
    RepresentationInconsistent(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// The renormalized slow frequency is not positive.
    #[error("parameter regime invalid: {0}")]
    RegimeInvalid(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("operator does not commute with the parity (max |[H, P]| = {0:e})")]
    NotBlockDiagonal(f64),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("transition not bracketed: {0}")]
    NotBracketed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
