use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the graph model, the solvers and the file front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid {kind} `{id}`: {reason}")]
    Invariant {
        kind: &'static str,
        id: String,
        reason: String,
    },

    #[error("spectral parameter out of range: {0}")]
    OutOfRange(String),

    #[error("spectral point: system is singular at lambda = {lambda} (sigma_min = {sigma_min:.3e}, ||M|| = {norm:.3e})")]
    SpectralPoint {
        lambda: f64,
        sigma_min: f64,
        norm: f64,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("threshold decomposition failed: {0}")]
    Decomposition(String),

    #[error("ambiguous eigenvalue matching: {0}")]
    Ambiguous(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invariant(
        kind: &'static str,
        id: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Invariant {
            kind,
            id: id.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
