use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel evaluated at the origin")]
    KernelSingularity,

    #[error("matrix is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("point lies inside the shape; complement regions are undefined there")]
    InsideShape,

    #[error("too many atoms: {count} exceeds the limit {limit}")]
    TooManyAtoms { count: u64, limit: u64 },

    #[error("quadratic cost guard: {pairs} pairs exceeds the limit {limit}")]
    TooManyPairs { pairs: u128, limit: u128 },

    #[error("scale {value:e} is below the resolution floor {floor:e}")]
    ResolutionFloor { value: f64, floor: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed measure file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
