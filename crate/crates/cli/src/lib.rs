//! Command-line driver: simulate transmission maps, single spectra, and fit
//! them back to coupling, linewidth and crossing field.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 I/O error,
//! 4 numerical failure of a fit.

pub mod args;
pub mod commands;
pub mod config;

use thiserror::Error;

pub use args::{Args, Command, InputFormat};
pub use commands::{fit, run, simulate, spectrum, PartialReport};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("I/O: {0}")]
    Io(String),
    #[error("fit failed: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}
