//! Two-time correlator of measurements given by their co-rotating amplitudes.

use ramsey_core::fock::{oracle_correlation_resolved, resolved_dim};
use ramsey_core::ramsey::{two_time_closed_form, ResolvedMeasurement};
use ramsey_core::{ComplexAmp, OscillatorState};
use rayon::prelude::*;
use serde_json::json;

use super::{check_dim, comparison_failure, max_abs_diff, Report};
use crate::config::{complex, RunConfig};
use crate::error::CliError;
use crate::io::{Cell, Table};

pub const DEFAULT_TOL: f64 = 1e-6;

/// Key column values, alpha1 and alpha2 of one output row.
type Point = (Vec<f64>, ComplexAmp, ComplexAmp);

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = &cfg.correlate;
    let state = OscillatorState::thermal(s.nbar)?;
    let engine = cfg.engine;

    let (keys, points): (&[&str], Vec<Point>) = match s.alpha1 {
        None => {
            if !(s.alpha.is_finite() && s.alpha >= 0.0) {
                return Err(CliError::Config("alpha must be finite and >= 0".into()));
            }
            let a1 = ComplexAmp::new(s.alpha, 0.0);
            let pts = s
                .theta_grid
                .points()
                .into_iter()
                .map(|t| (vec![t], a1, ComplexAmp::from_polar(s.alpha, t)))
                .collect();
            (&["theta"], pts)
        }
        Some(a1) => {
            let a1 = complex(a1);
            let mut pts = Vec::new();
            for im in s.im_grid.points() {
                for re in s.re_grid.points() {
                    pts.push((vec![re, im], a1, ComplexAmp::new(re, im)));
                }
            }
            (&["re_alpha2", "im_alpha2"], pts)
        }
    };

    let pair = |a1: ComplexAmp, a2: ComplexAmp| {
        [
            ResolvedMeasurement::from_relative(a1, s.phibar1),
            ResolvedMeasurement::from_relative(a2, s.phibar2),
        ]
    };
    let dim = if engine.oracle() {
        let need = points
            .iter()
            .map(|(_, a1, a2)| resolved_dim(&pair(*a1, *a2), &state))
            .max()
            .unwrap_or(1);
        Some(check_dim(need, cfg)?)
    } else {
        None
    };

    let values: Vec<(Option<f64>, Option<f64>)> = points
        .par_iter()
        .map(|(_, a1, a2)| -> Result<_, CliError> {
            let analytic = engine
                .analytic()
                .then(|| two_time_closed_form(*a1, *a2, s.phibar1, s.phibar2, &state));
            let oracle = match dim {
                Some(d) => Some(oracle_correlation_resolved(
                    &pair(*a1, *a2),
                    &state,
                    Some(d),
                )?),
                None => None,
            };
            Ok((analytic, oracle))
        })
        .collect::<Result<_, _>>()?;

    let mut header: Vec<&str> = keys.to_vec();
    if engine.analytic() {
        header.push("c_analytic");
    }
    if engine.oracle() {
        header.push("c_oracle");
    }
    let both = engine.analytic() && engine.oracle();
    if both {
        header.push("abs_diff");
    }
    let mut table = Table::new(&header);
    for ((k, _, _), (a, o)) in points.iter().zip(&values) {
        let mut row: Vec<Cell> = k.iter().map(|&x| x.into()).collect();
        row.extend(a.map(Cell::from));
        row.extend(o.map(Cell::from));
        if let (Some(a), Some(o)) = (a, o) {
            row.push((a - o).abs().into());
        }
        table.push(row);
    }

    let tol = cfg.tol_or(DEFAULT_TOL);
    let diff = both.then(|| max_abs_diff(values.iter().filter_map(|(a, o)| Some(((*a)?, (*o)?)))));
    let failure = diff.and_then(|d| comparison_failure("correlate", d, tol));
    Ok(Report {
        stem: "correlate",
        table,
        summary: json!({
            "mode": if s.alpha1.is_some() { "alpha2_plane" } else { "theta" },
            "points": points.len(),
            "oracle_dim": dim,
            "max_abs_diff": diff,
            "tol": tol,
        }),
        failure,
    })
}
