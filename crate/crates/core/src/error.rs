use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("image must be at least 1x1, got {0}x{1}")]
    EmptyImage(u32, u32),

    #[error("pixel buffer holds {got} bytes, expected {expected}")]
    BufferSize { expected: usize, got: usize },

    #[error("span list is empty")]
    EmptySpans,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("malformed SVG: {0}")]
    SvgParse(String),

    #[error("malformed document: {0}")]
    Document(String),

    #[error("malformed manifest at line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("output already exists: {0} (pass resume to continue an earlier run)")]
    OutputCollision(PathBuf),

    #[error("run interrupted after {0} images")]
    Interrupted(usize),

    #[error("analysis needs at least {needed} entries, got {got}")]
    InsufficientEntries { needed: usize, got: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
