use std::path::PathBuf;

use thiserror::Error;

use crate::optimizer::RunTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dissimilarity matrix: {0}")]
    InvalidMatrix(String),

    #[error("lambda {0} is outside [0, 1]")]
    InvalidLambda(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid weight parameters: {0}")]
    InvalidParams(String),

    #[error("pair index ({i}, {j}) out of range for n = {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite coordinate produced during epoch {epoch}")]
    NonFiniteUpdate { epoch: usize, trace: Box<RunTrace> },

    #[error("k = {k} is invalid for n = {n} (requires {requirement})")]
    InvalidK {
        k: usize,
        n: usize,
        requirement: &'static str,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("asymmetric matrix: d[{i}][{j}] = {a} but d[{j}][{i}] = {b}")]
    AsymmetricMatrix { i: usize, j: usize, a: f64, b: f64 },

    #[error("negative distance d[{i}][{j}] = {value}")]
    NegativeDistance { i: usize, j: usize, value: f64 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
