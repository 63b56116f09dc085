use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported Matrix Market format: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Matrix(#[from] csr5::Error),

    #[error("infeasible synthetic matrix: {0}")]
    Infeasible(String),

    #[error("kernel {kernel} disagrees with the reference: max relative error {max_rel_err:e}")]
    Correctness { kernel: String, max_rel_err: f64 },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
