//! One module per subcommand. Each returns a [`Report`]; writing it out is
//! left to the caller.

use ramsey_core::fock::adequate_dim;
use serde_json::Value;

use crate::cli::Command;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::Table;

pub mod classical;
pub mod correlate;
pub mod decoherence;
pub mod lgi_sweep;
pub mod verify;
pub mod wigner;

#[derive(Debug, Clone)]
pub struct Report {
    pub stem: &'static str,
    pub table: Table,
    pub summary: Value,
    /// Set when the data were produced but a check on them failed.
    pub failure: Option<String>,
}

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Correlate(_) => correlate::run(cfg),
        Command::LgiSweep(_) => lgi_sweep::run(cfg),
        Command::Wigner(_) => wigner::run(cfg),
        Command::Classical(_) => classical::run(cfg),
        Command::Decoherence(_) => decoherence::run(cfg),
        Command::Verify => verify::run(cfg),
    }
}

/// Fails with a truncation error before any work when `required` exceeds the cap.
fn check_dim(required: usize, cfg: &RunConfig) -> Result<usize, CliError> {
    if required > cfg.max_dim {
        return Err(ramsey_core::Error::Truncation {
            required,
            actual: cfg.max_dim,
        }
        .into());
    }
    Ok(required)
}

/// Dimension holding a state of coherent reach `reach` on top of occupation `nbar`.
fn dim_for(reach: f64, nbar: f64, cfg: &RunConfig) -> Result<usize, CliError> {
    check_dim(adequate_dim(reach, nbar), cfg)
}

/// Largest `|a - b|` over paired values, ignoring rows without an oracle value.
fn max_abs_diff(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn comparison_failure(what: &str, max_diff: f64, tol: f64) -> Option<String> {
    (max_diff.is_nan() || max_diff > tol)
        .then(|| format!("{what}: max |analytic - oracle| = {max_diff:.3e} exceeds tol {tol:.1e}"))
}
