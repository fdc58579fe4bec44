use std::path::PathBuf;

/// Exit code for input and validation failures.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit code for numerical and convergence failures.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] thermorisk_core::Error),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::NotConverged(_) => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    pub(crate) fn input(path: &std::path::Path, msg: impl Into<String>) -> Self {
        CliError::Input { path: path.to_path_buf(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
