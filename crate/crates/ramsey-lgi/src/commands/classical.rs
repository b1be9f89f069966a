//! Quantum two-time correlator next to its classical-field counterpart, with
//! a Monte Carlo estimate of the latter.

use std::f64::consts::{PI, TAU};

use ramsey_core::classical::{
    classical_lgi_w, classical_two_time_amp, ClassicalFieldParams, McPlan, MIN_SAMPLES,
};
use ramsey_core::lgi::lgi_w;
use ramsey_core::ramsey::two_time_closed_form;
use ramsey_core::stats::Moments;
use ramsey_core::{ComplexAmp, MeasurementSpec, OscillatorState};
use rayon::prelude::*;
use serde_json::json;

use super::Report;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::Table;

/// Any `|z|` at or above this fails the run.
pub const Z_LIMIT: f64 = 4.0;

/// Two half-period windows of amplitude `alpha` whose second amplitude is
/// rotated by `theta`, with the coupling chosen to match.
pub fn window_pair(
    alpha: f64,
    theta: f64,
    variance: f64,
    omega: f64,
    phis: [f64; 2],
) -> Result<(ClassicalFieldParams, [MeasurementSpec; 2]), CliError> {
    let tau = PI / omega;
    let p = ClassicalFieldParams {
        variance,
        omega,
        lambda: 0.5 * alpha * omega,
    };
    let specs = [
        MeasurementSpec::static_window(phis[0], tau, tau)?,
        MeasurementSpec::static_window(phis[1], tau, tau + (TAU + theta.rem_euclid(TAU)) / omega)?,
    ];
    Ok((p, specs))
}

/// Sample mean and standard error over `n_samples`, merging shards in index order.
pub fn monte_carlo(plan: &McPlan, n_samples: u64, seed: u64) -> Moments {
    let shards: Vec<(u64, u64)> = McPlan::shards(n_samples).collect();
    let parts: Vec<Moments> = shards
        .par_iter()
        .map(|&(i, n)| plan.shard(seed, i, n))
        .collect();
    let mut total = Moments::new();
    for m in &parts {
        total.merge(m);
    }
    total
}

/// `(estimate - exact) / stderr`; zero spread is scored as exact agreement or as infinite.
pub fn z_score(estimate: f64, stderr: f64, exact: f64) -> f64 {
    let d = estimate - exact;
    if stderr > 0.0 {
        d / stderr
    } else if d.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = &cfg.classical;
    if !(s.alpha.is_finite() && s.alpha >= 0.0) {
        return Err(CliError::Config("alpha must be finite and >= 0".into()));
    }
    if s.samples < MIN_SAMPLES {
        return Err(CliError::Config(format!(
            "samples must be at least {MIN_SAMPLES}"
        )));
    }
    let variance = s.variance();
    let state = OscillatorState::thermal(s.nbar)?;
    let [p1, p2, _] = s.phases;
    let thetas = s.theta_grid.points();

    let rows: Vec<[f64; 8]> = thetas
        .iter()
        .enumerate()
        .map(|(i, &theta)| -> Result<_, CliError> {
            let (fp, specs) = window_pair(s.alpha, theta, variance, cfg.params.omega, [p1, p2])?;
            let plan = McPlan::new(&specs, &fp)?;
            let mc = monte_carlo(&plan, s.samples, cfg.seed.wrapping_add(i as u64));
            let c_cl = classical_two_time_amp(s.alpha, theta, variance, p1, p2);
            let a1 = ComplexAmp::new(s.alpha, 0.0);
            Ok([
                theta,
                two_time_closed_form(a1, ComplexAmp::from_polar(s.alpha, theta), p1, p2, &state),
                c_cl,
                lgi_w(s.alpha, theta, s.nbar, s.phases),
                classical_lgi_w(s.alpha, theta, variance, s.phases),
                mc.mean(),
                mc.std_error(),
                z_score(mc.mean(), mc.std_error(), c_cl),
            ])
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&[
        "theta",
        "c_quantum",
        "c_classical",
        "w_quantum",
        "w_classical",
        "mc_estimate",
        "mc_stderr",
        "z",
    ]);
    for r in &rows {
        table.push(r.iter().map(|&x| x.into()).collect());
    }

    let max_z = rows.iter().map(|r| r[7].abs()).fold(0.0, f64::max);
    let max_w_classical = rows.iter().map(|r| r[4]).fold(f64::NEG_INFINITY, f64::max);
    let max_w_quantum = rows.iter().map(|r| r[3]).fold(f64::NEG_INFINITY, f64::max);
    let failure = (max_z.is_nan() || max_z >= Z_LIMIT)
        .then(|| format!("classical: Monte Carlo |z| = {max_z:.2} reaches {Z_LIMIT}"));
    Ok(Report {
        stem: "classical",
        table,
        summary: json!({
            "alpha": s.alpha,
            "nbar": s.nbar,
            "variance": variance,
            "phases": s.phases,
            "samples": s.samples,
            "max_abs_z": max_z,
            "max_w_classical": max_w_classical,
            "max_w_quantum": max_w_quantum,
            "classical_within_bound": max_w_classical <= 1.0 + 1e-9,
        }),
        failure,
    })
}
