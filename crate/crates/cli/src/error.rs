use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{module}: {source}")]
    Core { module: &'static str, source: fracoint::Error },

    #[error("invalid report: {0}")]
    Report(String),
}

impl CliError {
    pub fn core(module: &'static str) -> impl Fn(fracoint::Error) -> CliError {
        move |source| CliError::Core { module, source }
    }

    /// Process exit status: 2 for bad input, 3 when a numerical procedure
    /// fails on valid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_numerical() => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
