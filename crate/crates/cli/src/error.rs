use std::path::PathBuf;

use thiserror::Error;

use isomed::session::SessionError;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const BACKEND: i32 = 3;
    pub const EXHAUSTED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error(transparent)]
    Session(SessionError),
    #[error("output digest {found} does not match the manifest's {expected}")]
    DigestMismatch { expected: String, found: String },
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Input {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Backend(_) => exit::BACKEND,
            CliError::Session(e) if e.is_backend() => exit::BACKEND,
            _ => exit::INPUT,
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        CliError::Session(e)
    }
}
