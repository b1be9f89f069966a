//! Run configuration. A JSON document supplies defaults and command-line
//! flags override individual fields; the merged result is what gets echoed
//! into each metadata sidecar.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ramsey_core::decoherence::BathParams;
use ramsey_core::lgi::OptimizerOpts;
use ramsey_core::{ComplexAmp, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Which model produces the values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Analytic,
    Oracle,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        self != Engine::Oracle
    }

    pub fn oracle(self) -> bool {
        self != Engine::Analytic
    }
}

/// Evenly spaced points `start..=stop`, written `start:stop:n`. A bare number
/// is a one-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, n: usize) -> Self {
        Self { start, stop, n }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| -> Result<f64, String> {
            let x: f64 = t
                .trim()
                .parse()
                .map_err(|_| format!("bad number {t:?} in grid {s:?}"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("grid {s:?} has a non-finite bound"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        let g = match parts.as_slice() {
            [x] => Grid::new(num(x)?, num(x)?, 1),
            [a, b, n] => {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad point count in grid {s:?}"))?;
                Grid::new(num(a)?, num(b)?, n)
            }
            _ => return Err(format!("grid {s:?} is not start:stop:n")),
        };
        if g.n == 0 {
            return Err(format!("grid {s:?} has no points"));
        }
        if g.n == 1 && g.start != g.stop {
            return Err(format!("one-point grid {s:?} needs start == stop"));
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.n)
        }
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

/// Parses `re,im` into a complex amplitude.
pub fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected re,im but got {s:?}"))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| format!("bad real part in {s:?}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| format!("bad imaginary part in {s:?}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(format!("amplitude {s:?} is not finite"));
    }
    Ok([re, im])
}

pub fn complex(a: [f64; 2]) -> ComplexAmp {
    ComplexAmp::new(a[0], a[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateSpec {
    /// Modulus of both amplitudes in the `theta` scan.
    pub alpha: f64,
    pub theta_grid: Grid,
    /// Fixed first amplitude; switches to a scan over the `alpha2` plane.
    pub alpha1: Option<[f64; 2]>,
    pub re_grid: Grid,
    pub im_grid: Grid,
    pub phibar1: f64,
    pub phibar2: f64,
    pub nbar: f64,
}

impl Default for CorrelateSpec {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            theta_grid: Grid::new(0.0, TAU, 64),
            alpha1: None,
            re_grid: Grid::new(-8.0, 8.0, 81),
            im_grid: Grid::new(-8.0, 8.0, 81),
            phibar1: 0.0,
            phibar2: 0.0,
            nbar: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LgiSpec {
    pub alpha_grid: Grid,
    pub theta_grid: Grid,
    pub nbar: f64,
    pub check_asymptote: bool,
    pub optimizer: OptimizerOpts,
}

impl Default for LgiSpec {
    fn default() -> Self {
        Self {
            alpha_grid: Grid::new(0.0, 3.0, 60),
            theta_grid: Grid::new(0.0, TAU, 60),
            nbar: 0.0,
            check_asymptote: false,
            optimizer: OptimizerOpts::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerSpec {
    pub alpha1: [f64; 2],
    pub phibar1: f64,
    /// Waiting times in units of `1 / (gamma max(n_eq, 1))`.
    pub gamma_th_dt: Vec<f64>,
    pub re_grid: Grid,
    pub im_grid: Grid,
}

impl Default for WignerSpec {
    fn default() -> Self {
        Self {
            alpha1: [5.0, 5.0],
            phibar1: 0.0,
            gamma_th_dt: vec![0.0, 0.04, 0.08],
            re_grid: Grid::new(-3.0, 8.0, 111),
            im_grid: Grid::new(-3.0, 8.0, 111),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalSpec {
    pub alpha: f64,
    pub theta_grid: Grid,
    /// Quantum occupation; the classical variance defaults to `(2 nbar + 1) / 2`.
    pub nbar: f64,
    pub variance: Option<f64>,
    pub phases: [f64; 3],
    pub samples: u64,
}

impl Default for ClassicalSpec {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            theta_grid: Grid::new(0.0, TAU, 33),
            nbar: 0.0,
            variance: None,
            phases: [PI, PI, 0.5 * PI],
            samples: 1_000_000,
        }
    }
}

impl ClassicalSpec {
    pub fn variance(&self) -> f64 {
        self.variance.unwrap_or(self.nbar + 0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoherenceSpec {
    pub omega_t_grid: Grid,
    pub phi: f64,
}

impl Default for DecoherenceSpec {
    fn default() -> Self {
        Self {
            omega_t_grid: Grid::new(0.0, 40.0 * PI, 81),
            phi: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub engine: Engine,
    pub params: SystemParams,
    pub bath: Option<BathParams>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    /// Comparison tolerance; each command has its own default.
    pub tol: Option<f64>,
    pub max_dim: usize,
    pub correlate: CorrelateSpec,
    pub lgi: LgiSpec,
    pub wigner: WignerSpec,
    pub classical: ClassicalSpec,
    pub decoherence: DecoherenceSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Analytic,
            params: SystemParams {
                omega: 1.0,
                lambda: 1.0,
            },
            bath: None,
            seed: 0,
            threads: None,
            out_dir: PathBuf::from("."),
            tol: None,
            max_dim: 200,
            correlate: CorrelateSpec::default(),
            lgi: LgiSpec::default(),
            wigner: WignerSpec::default(),
            classical: ClassicalSpec::default(),
            decoherence: DecoherenceSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn bath_or(&self, default: BathParams) -> BathParams {
        self.bath.unwrap_or(default)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        if let Some(b) = &self.bath {
            b.validate()?;
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Config("tol must be finite and > 0".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}
