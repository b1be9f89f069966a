//! Command-line surface and how flags are merged into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ramsey_core::decoherence::BathParams;

use crate::config::{parse_complex, Engine, Grid, RunConfig};
use crate::error::CliError;

pub const THREADS_ENV: &str = "RAMSEY_LGI_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ramsey-lgi",
    version,
    about = "Correlation sweeps, figure data and oracle cross-checks for sequential Ramsey measurements"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Oscillator energy damping rate.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Bath occupation.
    #[arg(long, global = true)]
    pub n_eq: Option<f64>,
    /// Qubit dephasing time.
    #[arg(long, global = true)]
    pub t2: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to the config, then RAMSEY_LGI_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Largest tolerated |analytic - oracle|.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest Fock dimension the oracle may use.
    #[arg(long, global = true)]
    pub max_dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-time correlator over a rotation angle or over the second amplitude.
    Correlate(CorrelateArgs),
    /// Largest Leggett-Garg witness over phases on an (alpha, theta) grid.
    LgiSweep(LgiArgs),
    /// Wigner function of the conditioned cat after thermal decay.
    Wigner(WignerArgs),
    /// Quantum and classical correlators with a Monte Carlo check.
    Classical(ClassicalArgs),
    /// Single-measurement contrast with a damped oscillator during the window.
    Decoherence(DecoherenceArgs),
    /// Fixed analytic-versus-oracle suite.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Correlate(_) => "correlate",
            Command::LgiSweep(_) => "lgi-sweep",
            Command::Wigner(_) => "wigner",
            Command::Classical(_) => "classical",
            Command::Decoherence(_) => "decoherence",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta_grid: Option<Grid>,
    /// First amplitude `re,im`; scans the second amplitude over a plane.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha1: Option<[f64; 2]>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_grid: Option<Grid>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_grid: Option<Grid>,
    #[arg(long, allow_hyphen_values = true)]
    pub phibar1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phibar2: Option<f64>,
    #[arg(long)]
    pub nbar: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LgiArgs {
    /// Single amplitude instead of a grid.
    #[arg(long, conflicts_with_all = ["alpha_grid", "alpha_max"])]
    pub alpha: Option<f64>,
    /// Upper end of the amplitude grid.
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_grid: Option<Grid>,
    #[arg(long)]
    pub theta_grid: Option<Grid>,
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Compare against the large- and small-amplitude laws.
    #[arg(long)]
    pub check_asymptote: bool,
    /// Phase grid points per axis for the optimizer.
    #[arg(long)]
    pub opt_grid: Option<usize>,
    #[arg(long)]
    pub opt_starts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha1: Option<[f64; 2]>,
    #[arg(long, allow_hyphen_values = true)]
    pub phibar1: Option<f64>,
    /// Comma-separated waiting times in units of `1 / (gamma max(n_eq, 1))`.
    #[arg(long, value_delimiter = ',')]
    pub gamma_th_dt: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_grid: Option<Grid>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta_grid: Option<Grid>,
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Classical `<x^2>`; defaults to `nbar + 1/2`.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Three comma-separated readout phases for the witness.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phases: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DecoherenceArgs {
    #[arg(long)]
    pub omega_t_grid: Option<Grid>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

/// Bath a command uses when none is configured.
pub fn default_bath(command: &Command) -> BathParams {
    match command {
        Command::Decoherence(_) => BathParams {
            gamma: 0.001,
            n_eq: 10.0,
            t2: f64::INFINITY,
        },
        _ => BathParams {
            gamma: 0.01,
            n_eq: 10.0,
            t2: f64::INFINITY,
        },
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Loads the config file (or defaults), applies every flag and validates.
/// The thread count falls back to `threads_env` when neither flag nor file sets it.
pub fn effective_config(cli: &Cli, threads_env: Option<&str>) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.engine, c.engine);
    set(&mut cfg.params.omega, c.omega);
    set(&mut cfg.params.lambda, c.lambda);
    if c.gamma.is_some() || c.n_eq.is_some() || c.t2.is_some() {
        let mut b = cfg.bath_or(default_bath(&cli.command));
        set(&mut b.gamma, c.gamma);
        set(&mut b.n_eq, c.n_eq);
        set(&mut b.t2, c.t2);
        cfg.bath = Some(b);
    }
    set(&mut cfg.seed, c.seed);
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    if cfg.threads.is_none() {
        if let Some(s) = threads_env.filter(|s| !s.trim().is_empty()) {
            let n = s.trim().parse().map_err(|_| {
                CliError::Config(format!("{THREADS_ENV}={s:?} is not a thread count"))
            })?;
            cfg.threads = Some(n);
        }
    }
    set(&mut cfg.out_dir, c.out_dir.clone());
    if c.tol.is_some() {
        cfg.tol = c.tol;
    }
    set(&mut cfg.max_dim, c.max_dim);

    match &cli.command {
        Command::Correlate(a) => {
            let s = &mut cfg.correlate;
            set(&mut s.alpha, a.alpha);
            set(&mut s.theta_grid, a.theta_grid);
            if a.alpha1.is_some() {
                s.alpha1 = a.alpha1;
            }
            set(&mut s.re_grid, a.re_grid);
            set(&mut s.im_grid, a.im_grid);
            set(&mut s.phibar1, a.phibar1);
            set(&mut s.phibar2, a.phibar2);
            set(&mut s.nbar, a.nbar);
        }
        Command::LgiSweep(a) => {
            let s = &mut cfg.lgi;
            set(&mut s.alpha_grid, a.alpha_grid);
            if let Some(x) = a.alpha {
                s.alpha_grid = Grid::new(x, x, 1);
            }
            if let Some(m) = a.alpha_max {
                s.alpha_grid.stop = m;
                if s.alpha_grid.n == 1 {
                    s.alpha_grid.start = m;
                }
            }
            set(&mut s.theta_grid, a.theta_grid);
            set(&mut s.nbar, a.nbar);
            s.check_asymptote |= a.check_asymptote;
            set(&mut s.optimizer.grid, a.opt_grid);
            set(&mut s.optimizer.starts, a.opt_starts);
        }
        Command::Wigner(a) => {
            let s = &mut cfg.wigner;
            set(&mut s.alpha1, a.alpha1);
            set(&mut s.phibar1, a.phibar1);
            set(&mut s.gamma_th_dt, a.gamma_th_dt.clone());
            set(&mut s.re_grid, a.re_grid);
            set(&mut s.im_grid, a.im_grid);
        }
        Command::Classical(a) => {
            let s = &mut cfg.classical;
            set(&mut s.alpha, a.alpha);
            set(&mut s.theta_grid, a.theta_grid);
            set(&mut s.nbar, a.nbar);
            if a.variance.is_some() {
                s.variance = a.variance;
            }
            if let Some(p) = &a.phases {
                s.phases = p
                    .as_slice()
                    .try_into()
                    .map_err(|_| CliError::Config("--phases takes exactly three values".into()))?;
            }
            set(&mut s.samples, a.samples);
        }
        Command::Decoherence(a) => {
            let s = &mut cfg.decoherence;
            set(&mut s.omega_t_grid, a.omega_t_grid);
            set(&mut s.phi, a.phi);
        }
        Command::Verify => {}
    }
    cfg.validate()?;
    Ok(cfg)
}
