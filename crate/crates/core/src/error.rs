use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent linear system: relative residual {residual:.3e}")]
    Inconsistent { residual: f64 },

    #[error("enumeration budget exceeded: {count} candidates (limit {limit})")]
    BudgetExceeded { count: f64, limit: f64 },

    #[error("epigraph violated at coordinate {index}: theta {theta} < L(z) {value}")]
    EpigraphViolation { index: usize, theta: f64, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
