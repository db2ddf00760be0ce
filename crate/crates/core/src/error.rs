use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid architecture: {0}")]
    InvalidArch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical divergence at step {step} (t = {time})")]
    Divergence { step: u64, time: f64 },

    #[error("label {label} of sample {index} is outside 0..{classes}")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },

    #[error("waiting time {tw} has no snapshot; available: {available:?}")]
    MissingSnapshot { tw: f64, available: Vec<f64> },

    #[error("no noise value D recorded for waiting time {tw}")]
    MissingNoise { tw: f64 },

    #[error("noise value D({tw}) is zero; cannot rescale")]
    ZeroNoise { tw: f64 },

    #[error("curves have no overlapping support in t")]
    NoOverlap,

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("{path}: bad magic at offset {offset}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        path: PathBuf,
        offset: u64,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated at offset {offset}")]
    Truncated { path: PathBuf, offset: u64 },

    #[error("sample count mismatch: {images_path} has {images}, {labels_path} has {labels}")]
    CountMismatch {
        images_path: PathBuf,
        labels_path: PathBuf,
        images: u64,
        labels: u64,
    },

    #[error("{path}: not a snapshot file: {reason}")]
    BadSnapshotFile { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
