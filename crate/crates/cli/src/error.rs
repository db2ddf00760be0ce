use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] quenchlab_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Schema {
        path: PathBuf,
        /// 1-based line number in the file; the header is row 1.
        row: usize,
        message: String,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn schema(path: impl AsRef<Path>, row: usize, message: impl Into<String>) -> Self {
        Self::Schema {
            path: path.as_ref().to_path_buf(),
            row,
            message: message.into(),
        }
    }

    /// Process exit status: 2 configuration, 3 divergence, 4 input/output.
    pub fn exit_code(&self) -> u8 {
        use quenchlab_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } | Self::Schema { .. } => 4,
            Self::Core(e) => match e {
                E::Divergence { .. } => 3,
                E::Io { .. }
                | E::BadMagic { .. }
                | E::Truncated { .. }
                | E::CountMismatch { .. }
                | E::BadSnapshotFile { .. } => 4,
                _ => 2,
            },
        }
    }
}
