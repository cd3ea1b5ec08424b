//! Driver behind the `menshov` binary: loads a JSON run config, runs one
//! subcommand against `menshov-core` and writes CSV/JSON/SVG reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] menshov_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not certified: {0}")]
    Uncertified(String),
}

impl CliError {
    /// 2 config, 3 precondition, 4 uncertified, 5 numeric failure, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        use menshov_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Uncertified(_) | CliError::Core(E::Uncertified(_)) => 4,
            CliError::Core(E::Quadrature(_) | E::UncertifiedCoefficient { .. }) => 5,
            CliError::Core(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    WienerScan,
    MsetLimit,
    Corrector,
    Claim,
    Demo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::WienerScan => "wiener-scan",
            Command::MsetLimit => "mset-limit",
            Command::Corrector => "corrector",
            Command::Claim => "claim",
            Command::Demo => "demo",
        }
    }
}

/// Command-line switches that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub workers: Option<usize>,
    /// `dotted.key=value` assignments, value parsed as JSON when possible.
    pub set: Vec<String>,
}

/// Loads `config_path`, applies `overrides` and runs `command`. Returns the
/// files written.
pub fn execute(
    command: Command,
    config_path: &Path,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    let mut config = config::load(config_path, &overrides.set)?;
    if overrides.out.is_some() {
        config.out = overrides.out.clone();
    }
    config.plot |= overrides.plot;
    if overrides.workers.is_some() {
        config.workers = overrides.workers;
    }
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| Path::new("menshov-out").join(command.name()));
    match config.workers {
        Some(0) => Err(CliError::Config("workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| commands::run(command, &config, &out)),
        None => commands::run(command, &config, &out),
    }
}
