//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("nonzero mean: {0}")]
    NonzeroMean(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt} above stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
