use thiserror::Error;

use crate::chainring::RingId;

/// Errors raised by the library layer.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operands live in different rings ({left} vs {right})")]
    MixedRings { left: RingId, right: RingId },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("enumeration of {required} cases exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    /// A theorem-guaranteed outcome failed to materialize. Always a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
