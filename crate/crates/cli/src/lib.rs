//! Command-line front end: dataset generation, evaluation, training-data
//! synthesis and the human-baseline server.

pub mod commands;
pub mod config;
pub mod serve;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    /// The run itself failed; exit code 3.
    #[error(transparent)]
    Run(#[from] spatial_bench::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Run(spatial_bench::Error::Config(_)) => 2,
            _ => 3,
        }
    }
}
