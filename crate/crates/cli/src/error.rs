use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),

    #[error(transparent)]
    Kerr(#[from] kerrloss::KerrError),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io(..) => "IoError",
            CliError::Kerr(_) => "ModelError",
            CliError::Validation(_) => "ValidationError",
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            CliError::Config(v) => v.clone(),
            other => vec![other.to_string()],
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
