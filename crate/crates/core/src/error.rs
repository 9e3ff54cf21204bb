use thiserror::Error;

/// Errors raised by the geometry, path and escape-time routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("invalid partition spacing h={h} for horizon t={t}")]
    InvalidSpacing { t: f64, h: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("point lies outside the unit ball (norm {0})")]
    OutsideBall(f64),

    #[error("configurations differ in length or radii ({0})")]
    LengthMismatch(String),

    #[error("scaling factor must lie in (0, 1], got {0}")]
    InvalidLambda(f64),

    #[error("q is not an expansion of p: pair ({0}, {1}) moved closer")]
    NotAnExpansion(usize, usize),

    #[error("motion parameter must lie in [0, 1], got {0}")]
    InvalidTau(f64),

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("argument {0} outside [-1, 1]")]
    OutOfRange(f64),

    #[error("invalid stretch lengths: {0}")]
    InvalidLengths(String),

    #[error("invalid disk configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
