use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Numerical(#[from] qed_binding::Error),

    #[error("cannot serialize report: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 1 for bad input, 2 for numerical or I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Validation(_) => 1,
            Self::Numerical(qed_binding::Error::Validation(_) | qed_binding::Error::Assumption(_)) => 1,
            Self::Numerical(_) | Self::Io { .. } | Self::Serialize(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
