//! Fixed suite pairing every closed form with an independent computation.
//! The table depends only on the configuration and seed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use ramsey_core::classical::{classical_two_time_amp, McPlan};
use ramsey_core::decoherence::{decayed_two_time, measurement_window_expectation, BathParams};
use ramsey_core::fock::{
    adequate_dim, evolve_sequence, kraus_measure, oracle_correlation, oracle_dim,
    window_expectation_oracle, window_steps, FockDensity, JointState, Level, QubitStep,
};
use ramsey_core::pulses::{integrate_schedule, resonant_train};
use ramsey_core::ramsey::{
    correlation, correlation_resolved, single_expectation, ResolvedMeasurement,
};
use ramsey_core::{
    ComplexAmp, CorrelationRequest, MeasurementSpec, OscillatorState, PulseSchedule, SystemParams,
};
use rayon::prelude::*;
use serde_json::json;

use super::classical::{monte_carlo, window_pair};
use super::{check_dim, Report};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::Table;

pub const EXACT_TOL: f64 = 1e-6;
pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const LINDBLAD_TOL: f64 = 1e-3;
pub const MC_SAMPLES: u64 = 100_000;
pub const MC_Z: f64 = 4.0;

pub const GRID_ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const GRID_THETAS: [f64; 4] = [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI];
pub const GRID_NBARS: [f64; 3] = [0.0, 0.5, 1.0];
const GRID_PHIS: [f64; 3] = [0.3, -0.7, 1.1];

/// `n` half-period windows of amplitude `alpha`, each rotated by `theta`
/// from the previous one (omega = 1), on a thermal state.
pub fn rotated_windows(
    alpha: f64,
    theta: f64,
    nbar: f64,
    n: usize,
) -> Result<(SystemParams, CorrelationRequest), CliError> {
    let p = SystemParams::new(1.0, 0.5 * alpha)?;
    let specs = (0..n)
        .map(|k| {
            MeasurementSpec::static_window(GRID_PHIS[k % 3], PI, PI + k as f64 * (TAU + theta))
        })
        .collect::<Result<_, _>>()?;
    Ok((
        p,
        CorrelationRequest {
            specs,
            initial: OscillatorState::thermal(nbar)?,
        },
    ))
}

/// Two equal static windows separated by `dt` whose amplitudes are parallel
/// or antiparallel, both of modulus `amp` (omega = 1).
pub fn aligned_windows(
    amp: f64,
    dt: f64,
    phis: [f64; 2],
) -> Result<(SystemParams, MeasurementSpec, MeasurementSpec), CliError> {
    let x = (-dt).rem_euclid(PI);
    let y = if (0.5 * x).sin() >= (0.5 * x + FRAC_PI_2).sin() {
        0.5 * x
    } else {
        0.5 * x + FRAC_PI_2
    };
    let tau = 2.0 * y;
    Ok((
        SystemParams::new(1.0, amp / (2.0 * y.sin()))?,
        MeasurementSpec::static_window(phis[0], tau, tau)?,
        MeasurementSpec::static_window(phis[1], tau, 2.0 * tau + dt)?,
    ))
}

/// Closed-form and Lindblad two-time correlators when the oscillator decays
/// between two aligned windows starting from the ground state.
pub fn decayed_pair(
    amp: f64,
    dt: f64,
    phis: [f64; 2],
    bath: &BathParams,
) -> Result<(f64, f64), CliError> {
    let (p, s1, s2) = aligned_windows(amp, dt, phis)?;
    let m1 = s1.resolve(&p)?;
    let m2 = s2.resolve(&p)?;
    let analytic = decayed_two_time(m2.alpha(), dt, bath, |a| {
        correlation_resolved(
            &[m1, ResolvedMeasurement::from_relative(a, m2.phibar())],
            &OscillatorState::Ground,
        )
        .unwrap_or(f64::NAN)
    })?;
    let req = CorrelationRequest {
        specs: vec![s1, s2],
        initial: OscillatorState::Ground,
    };
    Ok((analytic, oracle_correlation(&req, &p, Some(bath))?))
}

/// Relative displacement after `n` resonant half periods: closed form and
/// explicit qubit-oscillator evolution.
pub fn resonant_pair(n: usize, lambda: f64) -> Result<(ComplexAmp, ComplexAmp), CliError> {
    let p = SystemParams::new(1.0, lambda)?;
    let sched = resonant_train(&p, n)?;
    let closed = integrate_schedule(&p, &sched)?.alpha_rel;
    let mut steps = vec![QubitStep::HalfPi { phase: 0.0 }];
    steps.extend(window_steps(&sched)?);
    let reach = 2.0 * lambda * n as f64;
    let rho = FockDensity::ground(adequate_dim(reach, 0.0))?;
    let s = evolve_sequence(&JointState::ground_qubit(&rho), &steps, &p)?;
    let rel = s.conditional_mean_a(Level::Excited).unwrap_or_default()
        - s.conditional_mean_a(Level::Ground).unwrap_or_default();
    Ok((closed, rel))
}

struct Row {
    check: &'static str,
    case: String,
    analytic: f64,
    oracle: f64,
    diff: f64,
    tol: f64,
}

type Job<'a> = Box<dyn Fn() -> Result<Vec<Row>, CliError> + Send + Sync + 'a>;

fn row(check: &'static str, case: String, analytic: f64, oracle: f64, tol: f64) -> Row {
    Row {
        check,
        case,
        analytic,
        oracle,
        diff: (analytic - oracle).abs(),
        tol,
    }
}

fn jobs(cfg: &RunConfig) -> Result<Vec<Job<'_>>, CliError> {
    let exact = cfg.tol_or(EXACT_TOL);
    let mut out: Vec<Job> = Vec::new();

    for alpha in [0.5, 1.5, 3.0] {
        for nbar in [0.0, 1.0] {
            out.push(Box::new(move || {
                let p = SystemParams::new(1.0, 0.5 * alpha)?;
                let spec = MeasurementSpec::static_window(0.4, PI, PI)?;
                let state = OscillatorState::thermal(nbar)?;
                let rho = FockDensity::thermal(check_dim(adequate_dim(alpha, nbar), cfg)?, nbar)?;
                let k = kraus_measure(&rho, &spec, &p)?;
                let case = format!("alpha={alpha} nbar={nbar}");
                Ok(vec![
                    row(
                        "kraus_normalization",
                        case.clone(),
                        1.0,
                        k.p_plus + k.p_minus,
                        NORMALIZATION_TOL,
                    ),
                    row(
                        "kraus_probability",
                        case,
                        0.5 * (1.0 + single_expectation(&state, &spec, &p)?),
                        k.p_plus,
                        exact,
                    ),
                ])
            }));
        }
    }

    for alpha in GRID_ALPHAS {
        for theta in GRID_THETAS {
            for nbar in GRID_NBARS {
                for n in 1..=3 {
                    out.push(Box::new(move || {
                        let (p, req) = rotated_windows(alpha, theta, nbar, n)?;
                        check_dim(oracle_dim(&req, &p, None)?, cfg)?;
                        let case = format!("alpha={alpha} theta={theta:.6} nbar={nbar} n={n}");
                        Ok(vec![row(
                            "correlation",
                            case,
                            correlation(&req, &p)?,
                            oracle_correlation(&req, &p, None)?,
                            exact,
                        )])
                    }));
                }
            }
        }
    }

    for n in 1..=4 {
        out.push(Box::new(move || {
            let lambda = 0.1;
            let (closed, explicit) = resonant_pair(n, lambda)?;
            let law = if n % 2 == 0 { 1.0 } else { -1.0 } * 2.0 * lambda * n as f64;
            Ok(vec![
                row(
                    "resonant_train_law",
                    format!("n={n}"),
                    law,
                    closed.re,
                    1e-10,
                ),
                Row {
                    check: "resonant_train_evolution",
                    case: format!("n={n}"),
                    analytic: closed.re,
                    oracle: explicit.re,
                    diff: (closed - explicit).norm(),
                    tol: exact,
                },
            ])
        }));
    }

    for n_eq in [0.0, 1.0] {
        for g in [0.04, 0.08] {
            out.push(Box::new(move || {
                let bath = BathParams::new(0.01, n_eq, f64::INFINITY)?;
                let dt = g / (bath.gamma * n_eq.max(1.0));
                let (a, o) = decayed_pair(1.5, dt, [0.3, -0.4], &bath)?;
                Ok(vec![row(
                    "decayed_two_time",
                    format!("n_eq={n_eq} gamma_th_dt={g}"),
                    a,
                    o,
                    LINDBLAD_TOL,
                )])
            }));
        }
    }

    out.push(Box::new(|| {
        let p = SystemParams::new(1.0, 1.0)?;
        let bath = BathParams::new(0.01, 1.0, f64::INFINITY)?;
        let spec = MeasurementSpec::new(0.0, 4.0 * PI, PulseSchedule::static_window(4.0 * PI)?)?;
        let a = measurement_window_expectation(&spec, &p, &bath, &OscillatorState::thermal(1.0)?)?;
        let o = window_expectation_oracle(&spec, &p, &bath, 60)?;
        Ok(vec![row(
            "window_expectation",
            "lambda=1 omega_t=4pi gamma=0.01 n_eq=1".into(),
            a,
            o,
            LINDBLAD_TOL,
        )])
    }));

    for (i, theta) in [FRAC_PI_4, FRAC_PI_2, PI].into_iter().enumerate() {
        out.push(Box::new(move || {
            let (alpha, variance, phis) = (1.0, 0.5, [0.3, -0.4]);
            let (fp, specs) = window_pair(alpha, theta, variance, 1.0, phis)?;
            let mc = monte_carlo(
                &McPlan::new(&specs, &fp)?,
                MC_SAMPLES,
                cfg.seed.wrapping_add(i as u64),
            );
            let exact = classical_two_time_amp(alpha, theta, variance, phis[0], phis[1]);
            Ok(vec![row(
                "classical_monte_carlo",
                format!("theta={theta:.6}"),
                exact,
                mc.mean(),
                MC_Z * mc.std_error(),
            )])
        }));
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let rows: Vec<Row> = jobs(cfg)?
        .par_iter()
        .map(|j| j())
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut table = Table::new(&[
        "check", "case", "analytic", "oracle", "abs_diff", "tol", "pass",
    ]);
    let mut failed = Vec::new();
    for r in &rows {
        let pass = r.diff <= r.tol;
        if !pass {
            failed.push(format!("{} [{}]", r.check, r.case));
        }
        table.push(vec![
            r.check.into(),
            r.case.clone().into(),
            r.analytic.into(),
            r.oracle.into(),
            r.diff.into(),
            r.tol.into(),
            pass.into(),
        ]);
    }

    let mut checks: Vec<&str> = Vec::new();
    for r in &rows {
        if !checks.contains(&r.check) {
            checks.push(r.check);
        }
    }
    let per_check: Vec<_> = checks
        .iter()
        .map(|c| {
            let rs: Vec<&Row> = rows.iter().filter(|r| r.check == *c).collect();
            json!({
                "check": c,
                "cases": rs.len(),
                "failed": rs.iter().filter(|r| r.diff.is_nan() || r.diff > r.tol).count(),
                "max_abs_diff": rs.iter().map(|r| r.diff).fold(0.0, f64::max),
            })
        })
        .collect();
    let failure = (!failed.is_empty())
        .then(|| format!("{} case(s) failed: {}", failed.len(), failed.join(", ")));
    Ok(Report {
        stem: "verify",
        table,
        summary: json!({ "cases": rows.len(), "failed": failed.len(), "checks": per_check }),
        failure,
    })
}
