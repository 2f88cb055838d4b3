use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: landing_core::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Core(#[from] landing_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn file(path: impl Into<PathBuf>, source: landing_core::Error) -> Self {
        CliError::File {
            path: path.into(),
            source,
        }
    }

    /// 2 configuration, 3 I/O or file format, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        use landing_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Csv { .. } => 3,
            CliError::File { source, .. } | CliError::Core(source) => match source {
                E::Numeric(_) => 4,
                E::Io(_) | E::Format { .. } | E::BusClosed | E::Timeout => 3,
                E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::NotReady { .. } => 2,
            },
        }
    }
}
