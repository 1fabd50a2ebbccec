//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed its configured size budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A query did not match the ensemble layout it was issued against.
    #[error("dimension mismatch: expected {expected} stage weights, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A constructor argument violated its declared range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
