//! Scenario runner: reads a TOML scenario, solves or studies it, and writes
//! CSV tables plus a JSON summary.

pub mod commands;
pub mod config;
pub mod tables;

use thiserror::Error;

pub use commands::{resolve_out_dir, run_refinement_study, run_solve, run_verify, Outcome};
pub use config::ScenarioConfig;

/// Environment variable naming the output directory. A `--out` flag takes
/// precedence; the scenario's `output` key is the fallback.
pub const OUT_DIR_ENV: &str = "SPRICE_OUT_DIR";

#[derive(Debug, Clone, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("table error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Schema(_) | CliError::Io(_) => 1,
            CliError::NonConvergence(_) => 3,
        }
    }
}
