//! Command-line driver for the sequential Ramsey correlation models: sweeps,
//! figure data and analytic-versus-oracle checks, written as CSV with JSON
//! metadata.

use std::path::PathBuf;

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use cli::{effective_config, Cli};
use error::CliError;

/// Runs one command on a dedicated thread pool and writes its outputs.
/// Returns the CSV path, or the verification error after the data are written.
pub fn run(cli: &Cli, threads_env: Option<&str>) -> Result<PathBuf, CliError> {
    let cfg = effective_config(cli, threads_env)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let report = pool.install(|| commands::dispatch(&cli.command, &cfg))?;
    let path = io::write_outputs(
        &cfg,
        cli.command.name(),
        report.stem,
        &report.table,
        &report.summary,
    )?;
    match report.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(path),
    }
}
