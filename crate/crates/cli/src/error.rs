use std::path::PathBuf;

use thiserror::Error;

/// Error carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// 2 I/O, 3 validation or parse, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<axode_core::Error> for CliError {
    fn from(e: axode_core::Error) -> Self {
        use axode_core::Error as E;
        match e {
            E::Io { path, source } => CliError::Io { path, source },
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::Parse { .. } | E::Validation(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<axode_recognizer::Error> for CliError {
    fn from(e: axode_recognizer::Error) -> Self {
        use axode_recognizer::Error as E;
        match e {
            E::Core(inner) => inner.into(),
            E::Io { path, source } => CliError::Io { path, source },
            E::Diverged { .. } => CliError::Numerical(e.to_string()),
            E::Validation(_) | E::Checkpoint(_) => CliError::Validation(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
