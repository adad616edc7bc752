use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("{path}: unsupported bit depth ({detail})")]
    UnsupportedDepth { path: PathBuf, detail: String },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("image too small: {width}x{height}, need at least {min_w}x{min_h}")]
    TooSmall {
        width: usize,
        height: usize,
        min_w: usize,
        min_h: usize,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("not enough samples: have {have}, need {need}")]
    NotEnoughSamples { have: usize, need: usize },

    #[error("constant input: correlation is undefined")]
    ConstantInput,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("logistic fit failed: {0}")]
    FitFailure(String),

    #[error("manifest {path}, row {row}: {reason}")]
    Manifest {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("group {group:?} has {n} records, need at least {need}")]
    GroupTooSmall {
        group: String,
        n: usize,
        need: usize,
    },

    #[error("record {index}: {source}")]
    Record {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by the filesystem or unreadable inputs, as
    /// opposed to a valid input that fails validation.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Decode { .. }
            | Error::UnsupportedDepth { .. }
            | Error::Manifest { .. } => true,
            Error::Record { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
