use thiserror::Error;

/// Errors raised by the laboratory primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operation was asked for outside its mathematical domain
    /// (inverting a non-invertible operator, `inv2` of a non power of two).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or missing configuration (mode mismatch, undeclared
    /// weight pattern, caps exceeded, malformed schedules).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller-side precondition does not hold (support outside `L_m`,
    /// malformed split).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A value left the representable range (index cap, float conversion).
    #[error("overflow: {0}")]
    Overflow(String),

    /// Text could not be parsed into a scalar or operator description.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
