use std::path::{Path, PathBuf};

use pano_core::PanoError;
use thiserror::Error;

/// Process exit codes.
///
/// | code | meaning |
/// |---|---|
/// | 0 | success |
/// | 2 | input missing or unreadable |
/// | 64 | bad flags or arguments |
/// | 65 | readable input with invalid content, including script errors |
/// | 70 | internal failure, including failed writes |
pub mod exit {
    pub const OK: i32 = 0;
    pub const UNREADABLE_INPUT: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const INTERNAL: i32 = 70;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Unreadable { path: PathBuf, message: String },
    #[error("{0}")]
    Data(String),
    #[error("line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Unreadable { .. } => exit::UNREADABLE_INPUT,
            CliError::Data(_) | CliError::Script { .. } => exit::DATA,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn unreadable(path: &Path, message: impl ToString) -> Self {
        CliError::Unreadable {
            path: path.to_owned(),
            message: message.to_string(),
        }
    }

    pub fn write(path: &Path, e: impl ToString) -> Self {
        CliError::Internal(format!("writing {}: {}", path.display(), e.to_string()))
    }

    /// Flag values rejected by the core transforms.
    pub fn usage(e: PanoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
