//! Simulation-layer errors with CLI exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] sandwich_core::Error),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// CLI convention: 2 usage/validation, 3 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Resource(_) => 3,
            SimError::Core(sandwich_core::Error::EnumerationCap { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
