use std::path::PathBuf;

use thiserror::Error;

/// Process exit code for bad input: missing files, malformed documents,
/// values that fail validation.
pub const EXIT_INPUT: u8 = 2;
/// Process exit code for failures of the surrounding environment: output
/// not writable, port already bound.
pub const EXIT_ENVIRONMENT: u8 = 3;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] peerinf_core::Error),

    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: peerinf_core::Error,
    },

    #[error("{}: malformed file: {reason}", path.display())]
    Malformed { path: PathBuf, reason: String },

    #[error("{}: unsupported {what} version {found} (this build reads version {expected})", path.display())]
    Version {
        path: PathBuf,
        what: &'static str,
        found: u64,
        expected: u64,
    },

    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Environment(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Write { .. } | AppError::Environment(_) => EXIT_ENVIRONMENT,
            _ => EXIT_INPUT,
        }
    }

    pub(crate) fn read(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Read {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Write {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        AppError::Malformed {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
