use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("header: {0}")]
    Header(String),

    /// `line` counts data lines after the header, starting at 1.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation: {0}")]
    Validation(String),

    #[error("insufficient points: {points} points for k = {k}")]
    InsufficientPoints { points: usize, k: usize },

    #[error("k must be at least 1")]
    ZeroClusters,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("profile undefined for image {image_id:?}: {keypoints} keypoint(s), need at least 2")]
    ProfileUndefined { image_id: String, keypoints: usize },

    #[error("n0 must be at least 1")]
    InvalidRingSize,

    #[error("incompatible: {0}")]
    Incompatible(String),

    #[error("index is empty")]
    EmptyIndex,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("generation failed for seed {seed}: {message}")]
    Generation { seed: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Wraps a parse or validation error with the file it came from.
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
