use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at coordinate {0}")]
    NonFinite(usize),

    #[error("invalid exponent {0}: p must satisfy p >= 1")]
    InvalidExponent(f64),

    #[error("the support set of the zero vector is the whole dual unit sphere")]
    ZeroVector,

    /// `index` is 0-based; the message names the operator `T{index + 1}`.
    #[error("T{} is not a certified contraction (norm bracket [{lower}, {upper}])", index + 1)]
    NotContraction {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("operator list is empty")]
    EmptyOperators,

    #[error("operators act on different spaces")]
    SpaceMismatch,

    #[error("vector is not a fixed point (relative residual {0:e})")]
    NotFixed(f64),

    #[error("trace keeps snapshots every {0} steps; full history (stride 1) is required")]
    MissingSnapshots(usize),

    #[error("support face has {0} free coordinates, too many vertices to enumerate")]
    FaceTooLarge(usize),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("exact arithmetic: {0}")]
    Exact(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
