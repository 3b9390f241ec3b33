//! Configuration-driven runner for the experiments in `gch-core`.
//!
//! Exit codes: 0 every check passed, 1 some check failed or was unasserted,
//! 2 blow-up or numeric failure, 3 configuration, resolution, stability or
//! I/O error.

use std::fmt;

pub mod config;
pub mod run;

pub use config::{Experiment, FieldKind, Overrides, RunConfig};
pub use run::{execute, RunOutcome};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CRITERION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(gch_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(gch_core::Error::BlowUp { .. } | gch_core::Error::Numeric(_)) => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gch_core::Error> for CliError {
    fn from(e: gch_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}
