//! Scenario runner: reads a JSON configuration, runs one stage of the
//! SPOPO model and writes CSV tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::ScenarioConfig;
pub use error::CliError;
pub use output::Metadata;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Supermodes,
    Squeezing,
    Pulses,
    Metrology,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Supermodes => "supermodes",
            Command::Squeezing => "squeezing",
            Command::Pulses => "pulses",
            Command::Metrology => "metrology",
        }
    }
}

/// Runs `command` on the configuration at `config`, writing into `out`.
/// Returns the files written.
pub fn run(command: Command, config: &Path, out: &Path, seed: u64) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(config).map_err(|e| CliError::Config {
        code: "config_io",
        field: None,
        message: format!("{}: {e}", config.display()),
    })?;
    let cfg = ScenarioConfig::parse(&text)?;
    fs::create_dir_all(out).map_err(|e| CliError::Output {
        path: out.to_path_buf(),
        message: e.to_string(),
    })?;
    let meta = Metadata::new(command.name(), &text, seed);
    match command {
        Command::Supermodes => commands::run_supermodes(&cfg, out, &meta),
        Command::Squeezing => commands::run_squeezing(&cfg, out, &meta),
        Command::Pulses => commands::run_pulses(&cfg, out, &meta),
        Command::Metrology => commands::run_metrology(&cfg, out, &meta),
    }
}
