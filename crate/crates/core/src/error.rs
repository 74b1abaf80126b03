//! Shared error type for model construction, validation, compilation, and
//! experiments.

use std::fmt;

/// Errors surfaced by fallible operations across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// Mismatched dimensions between signals, layers, or networks.
    ShapeMismatch(String),
    /// A scalar or integer argument is outside its admissible range.
    InvalidArgument(String),
    /// An evaluation point lies outside the admissible domain.
    DomainViolation(String),
    /// Stored parameters violate a declared norm bound.
    BoundViolation(String),
    /// A numeric guard tripped: overflow, underflow, or a non-finite value.
    NumericGuard(String),
    /// Serialized data could not be decoded or has the wrong schema.
    Serialization(String),
    /// An input/output operation failed.
    Io(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            CoreError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            CoreError::DomainViolation(msg) => write!(f, "domain violation: {msg}"),
            CoreError::BoundViolation(msg) => write!(f, "bound violation: {msg}"),
            CoreError::NumericGuard(msg) => write!(f, "numeric guard: {msg}"),
            CoreError::Serialization(msg) => write!(f, "serialization: {msg}"),
            CoreError::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl std::error::Error for CoreError {}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}

/// Crate-wide result alias.
pub type CoreResult<T> = Result<T, CoreError>;
