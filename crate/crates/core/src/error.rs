use std::path::PathBuf;

/// Errors produced by the localization toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("unknown world preset '{0}'")]
    UnknownPreset(String),

    #[error("timestamps must be strictly increasing: {prev} followed by {next}")]
    NonMonotoneTimestamp { prev: f64, next: f64 },

    #[error("estimate and ground truth share no overlapping time span")]
    EmptyOverlap,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
