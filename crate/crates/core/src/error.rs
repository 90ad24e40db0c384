use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ZbwError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ZbwError {
    /// A precondition on a physical input was violated. The message names it.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid too small: {escaped} of {total} samples ({fraction:.3e}) fell outside the grid")]
    SamplesEscaped {
        escaped: u64,
        total: u64,
        fraction: f64,
    },

    #[error("malformed input in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Missing or conflicting command-line inputs.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ZbwError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ZbwError::Domain(msg.into())
    }

    /// Domain-type failures: the inputs were well formed but physically invalid.
    pub fn is_domain(&self) -> bool {
        matches!(self, ZbwError::Domain(_) | ZbwError::SamplesEscaped { .. })
    }
}
