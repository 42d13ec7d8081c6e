use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A point lies outside the parameter domain.
    #[error("point outside the parameter domain: {0}")]
    Domain(String),
    /// A fidelity level index is out of range.
    #[error("fidelity level {level} out of range 1..={max}")]
    Level { level: usize, max: usize },
    /// A malformed argument (wrong length, unsupported count, empty set, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A structural precondition does not hold: non downward-closed index
    /// sets, singular interpolation systems, duplicate training points.
    #[error("structure error: {0}")]
    Structure(String),
    /// A numerical routine produced a non-finite or otherwise unusable result.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
