//! Batch runner behind the `agpw` binary: configuration loading, sweep
//! expansion, analytic and simulated evaluation, CSV output.

pub mod config;
pub mod run;

pub use config::{expand, parse_document, typed, ExperimentConfig, SweepPoint, DEFAULT_SWEEP_LIMIT};
pub use run::{evaluate, render_report, run_document, write_csv, Mode, Outcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] agpw_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 config, 3 truncation, 4 simulation cap, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => match e.root() {
                agpw_core::Error::InvalidParameter { .. } => 2,
                agpw_core::Error::Truncation { .. } => 3,
                agpw_core::Error::SimulationCap { .. } => 4,
                _ => 1,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
