//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by loading, extraction, and evaluation.
///
/// Variants are grouped by how a caller should treat them: `Config` for
/// invalid parameters, `Io`/`Data` for problems with input files or their
/// contents, and `Numerical` for internal numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or parameters (bad family name, fold count
    /// exceeding the minority class, non-positive thresholds, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Underlying I/O failure, annotated with the offending path.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or inconsistent input data (parse failures, invariant
    /// violations in manifests or trajectory files).
    #[error("data error: {0}")]
    Data(String),

    /// Internal numerical failure that no input validation can rule out.
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
