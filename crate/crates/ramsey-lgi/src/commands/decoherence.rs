//! Contrast of one static-window measurement while the oscillator is damped
//! during the window.

use ramsey_core::decoherence::{
    effective_decoherence_rate, measurement_window_expectation, solve_window, zeta_weak_damping,
    BathParams,
};
use ramsey_core::fock::window_expectation_oracle;
use ramsey_core::{MeasurementSpec, OscillatorState};
use rayon::prelude::*;
use serde_json::json;

use super::{comparison_failure, dim_for, max_abs_diff, Report};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{Cell, Table};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_BATH: BathParams = BathParams {
    gamma: 0.001,
    n_eq: 10.0,
    t2: f64::INFINITY,
};

struct Row {
    omega_t: f64,
    analytic: Option<f64>,
    oracle: Option<f64>,
    zeta: f64,
    zeta_weak: f64,
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = &cfg.decoherence;
    let params = cfg.params;
    let bath = cfg.bath_or(DEFAULT_BATH);
    let state = OscillatorState::thermal(bath.n_eq)?;
    let grid = s.omega_t_grid.points();
    if grid.iter().any(|&x| x < 0.0) {
        return Err(CliError::Config("omega_t values must be >= 0".into()));
    }
    // the branch amplitudes stay within 2 lambda / omega of the origin
    let dim = if cfg.engine.oracle() {
        Some(dim_for(2.0 * params.lambda / params.omega, bath.n_eq, cfg)?)
    } else {
        None
    };

    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&wt| -> Result<Row, CliError> {
            let t = wt / params.omega;
            if t == 0.0 {
                let z = s.phi.cos();
                return Ok(Row {
                    omega_t: wt,
                    analytic: Some(z),
                    oracle: dim.map(|_| z),
                    zeta: 0.0,
                    zeta_weak: 0.0,
                });
            }
            let spec = MeasurementSpec::static_window(s.phi, t, t)?;
            let analytic = if cfg.engine.analytic() {
                Some(measurement_window_expectation(
                    &spec, &params, &bath, &state,
                )?)
            } else {
                None
            };
            let oracle = match dim {
                Some(d) => Some(window_expectation_oracle(&spec, &params, &bath, d)?),
                None => None,
            };
            Ok(Row {
                omega_t: wt,
                analytic,
                oracle,
                zeta: solve_window(&spec.schedule, &params, &bath)?.zeta,
                zeta_weak: zeta_weak_damping(t, &params, &bath),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut header = vec!["omega_t"];
    if cfg.engine.analytic() {
        header.push("z_analytic");
    }
    if dim.is_some() {
        header.push("z_oracle");
    }
    let both = cfg.engine.analytic() && dim.is_some();
    if both {
        header.push("abs_diff");
    }
    header.extend(["zeta", "zeta_weak"]);
    let mut table = Table::new(&header);
    for r in &rows {
        let mut row: Vec<Cell> = vec![r.omega_t.into()];
        if cfg.engine.analytic() {
            row.extend(r.analytic.map(Cell::from));
        }
        row.extend(r.oracle.map(Cell::from));
        if both {
            row.push(
                (r.analytic.unwrap_or(f64::NAN) - r.oracle.unwrap_or(f64::NAN))
                    .abs()
                    .into(),
            );
        }
        row.extend([r.zeta.into(), r.zeta_weak.into()]);
        table.push(row);
    }

    let rate = effective_decoherence_rate(&params, &bath)?;
    let tol = cfg.tol_or(DEFAULT_TOL);
    let diff =
        both.then(|| max_abs_diff(rows.iter().filter_map(|r| Some((r.analytic?, r.oracle?)))));
    let failure = diff.and_then(|d| comparison_failure("decoherence", d, tol));
    Ok(Report {
        stem: "decoherence",
        table,
        summary: json!({
            "params": params,
            "bath": bath,
            "phi": s.phi,
            "rate_quoted": rate.quoted,
            "rate_fitted": rate.fitted,
            "oracle_dim": dim,
            "max_abs_diff": diff,
            "tol": tol,
        }),
        failure,
    })
}
