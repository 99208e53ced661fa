use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed genome: {0}")]
    MalformedGenome(String),

    #[error("input has length {got}, network expects {expected}")]
    InputLength { expected: usize, got: usize },

    #[error("non-finite value in network input")]
    NonFiniteInput,

    #[error("teacher sequence has length {got}, expected {expected}")]
    TeacherLength { expected: usize, got: usize },

    #[error("vector lengths differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("classification label {0} is not -1 or +1")]
    InvalidLabel(f64),

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("solver did not converge within {0} pair updates")]
    NoConvergence(usize),

    #[error("not enough training rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index {index} out of range for subpopulation of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
