use thiserror::Error;

use crate::padic::PadicError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("degenerate extension: {0}")]
    DegenerateExtension(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("matrix is singular over F_p")]
    SingularMatrix,
    #[error("coefficient precision {0} is too low (need at least 2)")]
    PrecisionTooLow(u32),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("element is not divisible: {0}")]
    NotDivisible(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precision(msg: impl Into<String>) -> Error {
    Error::InsufficientPrecision(msg.into())
}
