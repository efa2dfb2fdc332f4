use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, each mapped to a distinct exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] loewner_lab::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use loewner_lab::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::InvalidParameter { .. }) => 2,
            CliError::Core(E::NonNormalizable { .. }) => 3,
            CliError::Core(E::HorizonExceeded { .. }) => 4,
            _ => 1,
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "validation",
            3 => "non_normalizable",
            4 => "horizon_exceeded",
            _ => "failure",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
