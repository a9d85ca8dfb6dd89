use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge group {group} has zero total weight")]
    ZeroGroup { group: String },

    #[error("offset vector has zero length")]
    ZeroVector,

    #[error("kernel spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),

    #[error("{what} exceeds limit: {value} > {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("coarse level would be empty: {0}")]
    TooCoarse(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("mesh has no texture coordinates")]
    MissingUv,

    #[error("mesh has zero surface area")]
    DegenerateMesh,

    #[error("shape error: {0}")]
    Shape(String),

    #[error("network layer {layer} ({index}): {reason}")]
    SpecMismatch {
        index: usize,
        layer: String,
        reason: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("checksum mismatch: manifest says {expected:#010x}, blob region hashes to {actual:#010x}")]
    Checksum { expected: u32, actual: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
