//! Configuration-driven experiments over the `holostab-core` routines.
//!
//! A run reads one JSON configuration, executes the named experiment and
//! writes a CSV table plus `summary.json` into the output directory.

pub mod config;
pub mod experiment;
pub mod output;

use holostab_core::Error;
use thiserror::Error as ThisError;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, Outcome};
pub use output::{input_digest, write_outcome, Summary};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 1,
            Self::Numerical(e) => match e {
                Error::Convergence { .. } => 3,
                Error::SelfCheck(_) | Error::DegeneracyLost { .. } | Error::GaugeAlignment(_) => 4,
                _ => 2,
            },
        }
    }
}
