//! Wigner function of the cat left by one excited readout, after the
//! oscillator has decayed for a while.

use ramsey_core::decoherence::{cat_wigner, BathParams, DecayedCat, GridSpec, WignerGrid};
use ramsey_core::fock::{
    adequate_dim, displaced_parity_cached, kraus_measure_resolved, lindblad_propagate,
    DisplacementCache, FockDensity,
};
use ramsey_core::ramsey::ResolvedMeasurement;
use ramsey_core::{ComplexAmp, SystemParams};
use rayon::prelude::*;
use serde_json::json;

use super::{check_dim, comparison_failure, Report};
use crate::config::{complex, Grid, RunConfig};
use crate::error::CliError;
use crate::io::Table;

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_BATH: BathParams = BathParams {
    gamma: 0.01,
    n_eq: 10.0,
    t2: f64::INFINITY,
};

/// Waiting time for a dimensionless `gamma_th dt`, with `gamma_th = gamma
/// max(n_eq, 1)` so that a zero-temperature bath still has a time scale.
pub fn waiting_time(gamma_th_dt: f64, bath: &BathParams) -> Result<f64, CliError> {
    if !(gamma_th_dt.is_finite() && gamma_th_dt >= 0.0) {
        return Err(CliError::Config(
            "gamma_th_dt values must be finite and >= 0".into(),
        ));
    }
    if gamma_th_dt == 0.0 {
        return Ok(0.0);
    }
    if bath.gamma == 0.0 {
        return Err(CliError::Config(
            "a non-zero gamma_th_dt needs gamma > 0".into(),
        ));
    }
    Ok(gamma_th_dt / (bath.gamma * bath.n_eq.max(1.0)))
}

/// Probability of the excited outcome from the ground state.
pub fn excited_probability(alpha1: ComplexAmp, phibar1: f64) -> f64 {
    0.5 * (1.0 + phibar1.cos() * (-0.5 * alpha1.norm_sqr()).exp())
}

fn grid_spec(re: &Grid, im: &Grid) -> GridSpec {
    GridSpec {
        x_min: re.start,
        x_max: re.stop,
        nx: re.n,
        p_min: im.start,
        p_max: im.stop,
        np: im.n,
    }
}

/// Kraus-conditioned cat propagated by the master equation for `dt`, then
/// sampled by displaced parity. The frame co-rotates from the end of the
/// readout window, so lab-frame points are rotated by `-omega dt`.
pub fn oracle_wigner(
    alpha1: ComplexAmp,
    phibar1: f64,
    dt: f64,
    params: &SystemParams,
    bath: &BathParams,
    grid: &GridSpec,
    dim: usize,
) -> Result<WignerGrid, CliError> {
    let k = kraus_measure_resolved(
        &FockDensity::ground(dim)?,
        &ResolvedMeasurement::from_relative(alpha1, phibar1),
    )?;
    let rho0 = k.rho_plus.ok_or_else(|| {
        CliError::Config(
            "the excited outcome has vanishing probability for this alpha1 and phibar1".into(),
        )
    })?;
    let rho = if dt > 0.0 {
        lindblad_propagate(&rho0, dt, params, bath)?
    } else {
        rho0
    };
    let rot = ComplexAmp::from_polar(1.0, -params.omega * dt);
    let values: Vec<Vec<f64>> = (0..grid.np)
        .into_par_iter()
        .map_init(DisplacementCache::new, |cache, j| {
            (0..grid.nx)
                .map(|i| displaced_parity_cached(&rho, grid.point(i, j) * rot, cache))
                .collect()
        })
        .collect();
    Ok(WignerGrid {
        spec: *grid,
        values: values.concat(),
    })
}

/// Truncation that supports displaced parity everywhere on `grid`.
pub fn oracle_dim(alpha1: ComplexAmp, bath: &BathParams, grid: &GridSpec) -> usize {
    let corners = [
        (grid.x_min, grid.p_min),
        (grid.x_min, grid.p_max),
        (grid.x_max, grid.p_min),
        (grid.x_max, grid.p_max),
    ];
    let far = corners
        .iter()
        .map(|&(x, p)| ComplexAmp::new(x, p).norm())
        .fold(0.0, f64::max);
    adequate_dim(far + alpha1.norm(), bath.n_eq)
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = &cfg.wigner;
    let bath = cfg.bath_or(DEFAULT_BATH);
    let alpha1 = complex(s.alpha1);
    let grid = grid_spec(&s.re_grid, &s.im_grid);
    grid.validate()?;
    let p_plus = excited_probability(alpha1, s.phibar1);
    let dts: Vec<f64> = s
        .gamma_th_dt
        .iter()
        .map(|&g| waiting_time(g, &bath))
        .collect::<Result<_, _>>()?;
    let dim = if cfg.engine.oracle() {
        Some(check_dim(oracle_dim(alpha1, &bath, &grid), cfg)?)
    } else {
        None
    };

    let mut header = vec!["gamma_th_dt", "x", "p"];
    if cfg.engine.analytic() {
        header.push("w_analytic");
    }
    if dim.is_some() {
        header.push("w_oracle");
    }
    let both = cfg.engine.analytic() && dim.is_some();
    if both {
        header.push("abs_diff");
    }
    let mut table = Table::new(&header);
    let mut per_dt = Vec::new();
    let mut worst: f64 = 0.0;

    for (&g, &dt) in s.gamma_th_dt.iter().zip(&dts) {
        let analytic = if cfg.engine.analytic() {
            Some(cat_wigner(alpha1, s.phibar1, p_plus, dt, &bath, &grid)?)
        } else {
            None
        };
        let oracle = match dim {
            Some(d) => Some(oracle_wigner(
                alpha1,
                s.phibar1,
                dt,
                &cfg.params,
                &bath,
                &grid,
                d,
            )?),
            None => None,
        };
        let mut max_diff: f64 = 0.0;
        for j in 0..grid.np {
            for i in 0..grid.nx {
                let mut row = vec![g.into(), grid.x(i).into(), grid.p(j).into()];
                let a = analytic.as_ref().map(|w| w.get(i, j));
                let o = oracle.as_ref().map(|w| w.get(i, j));
                row.extend(a.map(Into::into));
                row.extend(o.map(Into::into));
                if let (Some(a), Some(o)) = (a, o) {
                    let d = (a - o).abs();
                    max_diff = if d.is_nan() {
                        f64::NAN
                    } else {
                        max_diff.max(d)
                    };
                    row.push(d.into());
                }
                table.push(row);
            }
        }
        if both {
            worst = if max_diff.is_nan() {
                f64::NAN
            } else {
                worst.max(max_diff)
            };
        }
        let cat = DecayedCat::new(alpha1, s.phibar1, p_plus, dt, &bath)?;
        per_dt.push(json!({
            "gamma_th_dt": g,
            "dt": dt,
            "nu": cat.nu(),
            "fringe_factor": cat.fringe_factor(),
            "integral_analytic": analytic.as_ref().map(WignerGrid::integral),
            "integral_oracle": oracle.as_ref().map(WignerGrid::integral),
            "max_abs_diff": both.then_some(max_diff),
        }));
    }

    let tol = cfg.tol_or(DEFAULT_TOL);
    let failure = if both {
        comparison_failure("wigner", worst, tol)
    } else {
        None
    };
    Ok(Report {
        stem: "wigner",
        table,
        summary: json!({
            "alpha1": s.alpha1,
            "phibar1": s.phibar1,
            "p_plus": p_plus,
            "bath": bath,
            "oracle_dim": dim,
            "tol": tol,
            "waits": per_dt,
        }),
        failure,
    })
}
