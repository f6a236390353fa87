use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the engine.
///
/// Configuration and domain errors are caller mistakes; numeric errors carry
/// enough provenance (cluster id, shift) to reproduce the failing solve.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported size: {what} has {size} vertices, limit is {limit}")]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("numeric failure on cluster {cluster}: {message}")]
    Numeric { cluster: usize, message: String },

    #[error("series truncation at n_max = {n_max} leaves a tail of up to {tail_bound:e}")]
    Precision { n_max: usize, tail_bound: f64 },

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a cluster id to a numeric error.
    pub fn at_cluster(self, id: usize) -> Self {
        match self {
            Error::Numeric { message, .. } => Error::Numeric {
                cluster: id,
                message,
            },
            other => other,
        }
    }
}
