use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A malformed input file or argument other than the config.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numeric(#[from] mfuq_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 2 for configuration and input problems, 3 for
    /// numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Input(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
