use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid or inconsistent scenario, codebook file or CLI override.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical routine failed or was called outside its domain.
    #[error("numerical failure: {0}")]
    Numerical(#[from] mmwave_discovery::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A results or codebook file could not be decoded.
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::Config(_) | SimError::Format { .. } => 2,
            SimError::Numerical(e) if !e.is_numerical() => 2,
            SimError::Numerical(_) => 3,
            SimError::Io { .. } => 1,
        }
    }
}
