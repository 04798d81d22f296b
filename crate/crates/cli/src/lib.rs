//! Command-line front end: configuration, the subcommands and the verification suites.

pub mod commands;
pub mod config;
pub mod table;
pub mod verify;

pub use config::{Format, Overrides, RunConfig, Solver};
pub use table::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] mongelab::Error),
    #[error("verification failed: {0} check(s) out of bounds")]
    Verification(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

/// Writes `text` to `cfg.output`, or returns it for stdout.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<Option<String>, CliError> {
    match &cfg.output {
        Some(p) => {
            std::fs::write(p, text)?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}
