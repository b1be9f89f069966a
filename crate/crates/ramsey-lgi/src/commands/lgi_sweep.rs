//! Heatmap of the maximal Leggett-Garg witness over `(alpha, theta)`.

use ramsey_core::fock::{oracle_correlation_resolved, resolved_dim};
use ramsey_core::lgi::{
    large_alpha_law, large_alpha_theta, maximize_w, small_alpha_excess, LgiPoint, OptimizerOpts,
};
use ramsey_core::ramsey::ResolvedMeasurement;
use ramsey_core::{ComplexAmp, OscillatorState};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{check_dim, comparison_failure, max_abs_diff, Report};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{Cell, Table};

pub const DEFAULT_TOL: f64 = 1e-6;
/// Largest witness quantum mechanics allows.
pub const QUANTUM_BOUND: f64 = 1.5;
/// Relative tolerance of the large-amplitude law.
pub const LARGE_ALPHA_REL_TOL: f64 = 0.02;
/// Slack on `(w_max - 1) / alpha^2` against the small-amplitude coefficient.
pub const SMALL_ALPHA_COEF_TOL: f64 = 0.05;
/// `w_max` above `1 + VIOLATION_EPS` counts as a violation.
pub const VIOLATION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoteCheck {
    pub law: &'static str,
    pub alpha: f64,
    pub theta: f64,
    pub w_max: f64,
    pub predicted: f64,
    pub pass: bool,
}

/// `W` from three explicit-matrix two-time correlators at the given phases.
pub fn oracle_w(
    alpha: f64,
    theta: f64,
    nbar: f64,
    phases: [f64; 3],
    dim: usize,
) -> Result<f64, CliError> {
    let state = OscillatorState::thermal(nbar)?;
    let m = |k: usize| {
        ResolvedMeasurement::from_relative(
            ComplexAmp::from_polar(alpha, k as f64 * theta),
            phases[k],
        )
    };
    let c = |i: usize, j: usize| oracle_correlation_resolved(&[m(i), m(j)], &state, Some(dim));
    Ok(c(0, 1)? + c(1, 2)? - c(0, 2)?)
}

/// Checks the grid points with `0 < alpha <= 0.1` against the small-amplitude
/// coefficient, and every `alpha >= 5` against the large-amplitude law at its
/// own angle.
pub fn asymptote_checks(
    points: &[LgiPoint],
    nbar: f64,
    opts: &OptimizerOpts,
) -> Result<Vec<AsymptoteCheck>, CliError> {
    let mut out = Vec::new();
    for p in points.iter().filter(|p| p.alpha > 0.0 && p.alpha <= 0.1) {
        let excess = small_alpha_excess(p.theta, nbar);
        let coef = (p.w_max - 1.0) / (p.alpha * p.alpha);
        let upper = coef <= excess.max(0.0) + SMALL_ALPHA_COEF_TOL;
        let lower = excess <= 0.0 || coef >= excess - SMALL_ALPHA_COEF_TOL;
        out.push(AsymptoteCheck {
            law: "small_alpha",
            alpha: p.alpha,
            theta: p.theta,
            w_max: p.w_max,
            predicted: 1.0 + p.alpha * p.alpha * excess.max(0.0),
            pass: upper && lower,
        });
    }
    let mut large: Vec<f64> = points
        .iter()
        .map(|p| p.alpha)
        .filter(|&a| a >= 5.0)
        .collect();
    large.dedup();
    for alpha in large {
        let theta = large_alpha_theta(alpha);
        let p = maximize_w(alpha, theta, nbar, opts)?;
        let predicted = large_alpha_law(alpha, nbar);
        let rel = ((p.w_max - predicted) / predicted).abs();
        out.push(AsymptoteCheck {
            law: "large_alpha",
            alpha,
            theta,
            w_max: p.w_max,
            predicted,
            pass: rel <= LARGE_ALPHA_REL_TOL && p.w_max <= QUANTUM_BOUND + 1e-6,
        });
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = &cfg.lgi;
    s.optimizer.validate()?;
    let alphas = s.alpha_grid.points();
    let thetas = s.theta_grid.points();
    let grid: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| thetas.iter().map(move |&t| (a, t)))
        .collect();

    let dim = if cfg.engine.oracle() {
        let amax = alphas.iter().copied().fold(0.0, f64::max);
        let worst = ResolvedMeasurement::from_relative(ComplexAmp::new(amax, 0.0), 0.0);
        Some(check_dim(
            resolved_dim(&[worst, worst], &OscillatorState::thermal(s.nbar)?),
            cfg,
        )?)
    } else {
        None
    };

    let points: Vec<LgiPoint> = grid
        .par_iter()
        .map(|&(a, t)| maximize_w(a, t, s.nbar, &s.optimizer))
        .collect::<Result<_, _>>()?;
    let oracle: Option<Vec<f64>> = match dim {
        Some(d) => Some(
            points
                .par_iter()
                .map(|p| oracle_w(p.alpha, p.theta, p.nbar, p.argmax_phases, d))
                .collect::<Result<_, _>>()?,
        ),
        None => None,
    };

    let mut header = vec!["alpha", "theta", "nbar", "w_max", "phi1", "phi2", "phi3"];
    if oracle.is_some() {
        header.extend(["w_oracle", "abs_diff"]);
    }
    let mut table = Table::new(&header);
    for (i, p) in points.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            p.alpha.into(),
            p.theta.into(),
            p.nbar.into(),
            p.w_max.into(),
        ];
        row.extend(p.argmax_phases.iter().map(|&x| Cell::from(x)));
        if let Some(o) = &oracle {
            row.push(o[i].into());
            row.push((o[i] - p.w_max).abs().into());
        }
        table.push(row);
    }

    let best = points.iter().max_by(|a, b| a.w_max.total_cmp(&b.w_max));
    let violating: Vec<&LgiPoint> = points
        .iter()
        .filter(|p| p.w_max > 1.0 + VIOLATION_EPS)
        .collect();
    let min_violating_alpha = violating.iter().map(|p| p.alpha).reduce(f64::min);
    let max_w = best.map(|p| p.w_max).unwrap_or(f64::NAN);
    if max_w > QUANTUM_BOUND + 1e-6 {
        eprintln!("warning: w_max = {max_w} exceeds the quantum bound {QUANTUM_BOUND}");
    }

    let tol = cfg.tol_or(DEFAULT_TOL);
    let diff = oracle
        .as_ref()
        .map(|o| max_abs_diff(points.iter().zip(o).map(|(p, &w)| (p.w_max, w))));
    let mut failure = diff.and_then(|d| comparison_failure("lgi-sweep", d, tol));

    let checks = if s.check_asymptote {
        Some(asymptote_checks(&points, s.nbar, &s.optimizer)?)
    } else {
        None
    };
    if let Some(bad) = checks.as_ref().and_then(|c| c.iter().find(|c| !c.pass)) {
        failure.get_or_insert_with(|| {
            format!(
                "{} law: w_max = {} at alpha = {}, theta = {}, predicted {}",
                bad.law, bad.w_max, bad.alpha, bad.theta, bad.predicted
            )
        });
    }

    Ok(Report {
        stem: "lgi_sweep",
        table,
        summary: json!({
            "points": points.len(),
            "nbar": s.nbar,
            "max_w": max_w,
            "argmax": best.map(|p| json!({"alpha": p.alpha, "theta": p.theta, "phases": p.argmax_phases})),
            "violations": violating.len(),
            "min_violating_alpha": min_violating_alpha,
            "within_quantum_bound": max_w <= QUANTUM_BOUND + 1e-6,
            "oracle_dim": dim,
            "max_abs_diff": diff,
            "tol": tol,
            "asymptote_checks": checks,
        }),
        failure,
    })
}
