//! Unitary qubit-oscillator evolution with explicit pulses.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    adequate_dim, annihilation, free_phases, require_dim, CMatrix, FockDensity, KrausOutcome,
};
use crate::error::{Error, Result};
use crate::pulses::{PulseSchedule, SystemParams};
use crate::ramsey::MeasurementSpec;

/// One step of a qubit control sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitStep {
    /// `pi/2` rotation taking `|g>` to `(|g> + e^{i phase} |e>) / sqrt(2)`.
    HalfPi { phase: f64 },
    /// `pi` flip `|e><g| + |g><e|`.
    Pi,
    /// Free evolution under `omega a^dag a + (Delta + lambda (a + a^dag)) |e><e|`.
    Evolve { dt: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Excited,
    Ground,
}

/// Qubit-oscillator density matrix as four oscillator blocks `<x|rho|y>`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub ee: CMatrix,
    pub eg: CMatrix,
    pub ge: CMatrix,
    pub gg: CMatrix,
}

impl JointState {
    /// `|g><g| (x) rho`.
    pub fn ground_qubit(rho: &FockDensity) -> Self {
        let z = CMatrix::zeros(rho.dim());
        Self {
            ee: z.clone(),
            eg: z.clone(),
            ge: z,
            gg: rho.matrix().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.gg.dim()
    }

    pub fn trace(&self) -> f64 {
        self.ee.trace().re + self.gg.trace().re
    }

    pub fn population(&self, level: Level) -> f64 {
        self.block(level).trace().re
    }

    fn block(&self, level: Level) -> &CMatrix {
        match level {
            Level::Excited => &self.ee,
            Level::Ground => &self.gg,
        }
    }

    /// Oscillator state conditioned on finding the qubit in `level`, or
    /// `None` below probability `1e-14`.
    pub fn conditional(&self, level: Level) -> Option<FockDensity> {
        let p = self.population(level);
        (p >= crate::ramsey::MIN_BRANCH_PROBABILITY).then(|| {
            FockDensity::from_matrix_unchecked(
                self.block(level).scale(Complex64::new(1.0 / p, 0.0)),
            )
        })
    }

    pub fn conditional_mean_a(&self, level: Level) -> Option<Complex64> {
        self.conditional(level).map(|r| r.mean_a())
    }

    fn rotate(&mut self, r: [[Complex64; 2]; 2]) {
        let blocks = [[&self.ee, &self.eg], [&self.ge, &self.gg]];
        let mut out: [[CMatrix; 2]; 2] =
            core::array::from_fn(|_| core::array::from_fn(|_| CMatrix::zeros(self.ee.dim())));
        for (x, row) in out.iter_mut().enumerate() {
            for (y, o) in row.iter_mut().enumerate() {
                for (a, brow) in blocks.iter().enumerate() {
                    for (b, blk) in brow.iter().enumerate() {
                        let c = r[x][a] * r[y][b].conj();
                        if c.norm() > 0.0 {
                            *o = o.axpy(c, blk);
                        }
                    }
                }
            }
        }
        let [[ee, eg], [ge, gg]] = out;
        *self = Self { ee, eg, ge, gg };
    }
}

fn half_pi(phase: f64) -> [[Complex64; 2]; 2] {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [
        [s, s * Complex64::from_polar(1.0, phase)],
        [-s * Complex64::from_polar(1.0, -phase), s],
    ]
}

fn excited_propagator(dim: usize, dt: f64, delta: f64, params: &SystemParams) -> CMatrix {
    let a = annihilation(dim);
    let h = a
        .add(&a.adjoint())
        .scale(Complex64::new(params.lambda, 0.0))
        .add(&CMatrix::from_fn(dim, |i, j| {
            if i == j {
                Complex64::new(params.omega * i as f64 + delta, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
    h.scale(Complex64::new(0.0, -dt)).expm()
}

/// Bound on how far any segment sequence can displace either branch.
fn sequence_reach(steps: &[QubitStep], params: &SystemParams) -> f64 {
    let cap = 2.0 * params.lambda.abs() / params.omega;
    steps
        .iter()
        .map(|s| match s {
            QubitStep::Evolve { dt, .. } => cap.min(params.lambda.abs() * dt),
            _ => 0.0,
        })
        .sum()
}

/// Applies `steps` in order. Each evolution segment uses the matrix
/// exponential of the excited-branch Hamiltonian and diagonal phases for the
/// ground branch.
pub fn evolve_sequence(
    state: &JointState,
    steps: &[QubitStep],
    params: &SystemParams,
) -> Result<JointState> {
    params.validate()?;
    let dim = state.dim();
    let n_mean = (state.ee.add(&state.gg))
        .as_slice()
        .iter()
        .step_by(dim + 1)
        .enumerate()
        .map(|(n, z)| n as f64 * z.re)
        .sum::<f64>();
    require_dim(
        dim,
        adequate_dim(
            sequence_reach(steps, params) + (2.0 * n_mean.max(0.0)).sqrt(),
            0.0,
        ),
    )?;

    let mut s = state.clone();
    let mut cached: Option<((u64, u64), CMatrix)> = None;
    for step in steps {
        match *step {
            QubitStep::HalfPi { phase } => s.rotate(half_pi(phase)),
            QubitStep::Pi => {
                let JointState { ee, eg, ge, gg } = s;
                s = JointState {
                    ee: gg,
                    eg: ge,
                    ge: eg,
                    gg: ee,
                };
            }
            QubitStep::Evolve { dt, delta } => {
                if !(dt.is_finite() && dt >= 0.0 && delta.is_finite()) {
                    return Err(Error::arg(
                        "evolution step needs finite dt >= 0 and finite detuning",
                    ));
                }
                let key = (dt.to_bits(), delta.to_bits());
                let ue = match &cached {
                    Some((k, u)) if *k == key => u.clone(),
                    _ => {
                        let u = excited_propagator(dim, dt, delta, params);
                        cached = Some((key, u.clone()));
                        u
                    }
                };
                let ug = free_phases(dim, params.omega, dt);
                let right_g = |m: &CMatrix| CMatrix::from_fn(dim, |i, j| m[(i, j)] * ug[j].conj());
                let left_g = |m: &CMatrix| CMatrix::from_fn(dim, |i, j| ug[i] * m[(i, j)]);
                s = JointState {
                    ee: ue.mul(&s.ee).mul_adjoint(&ue),
                    eg: right_g(&ue.mul(&s.eg)),
                    ge: left_g(&s.ge).mul_adjoint(&ue),
                    gg: right_g(&left_g(&s.gg)),
                };
            }
        }
    }
    Ok(s)
}

/// The window of `schedule` as lab-frame steps: segments with `fe = 0` run
/// with the qubit flipped, and a final flip restores the original labels.
/// Only two-level schedules can be realized this way.
pub fn window_steps(schedule: &PulseSchedule) -> Result<Vec<QubitStep>> {
    schedule.validate()?;
    if !schedule.is_two_level() {
        return Err(Error::UnsupportedState(
            "only two-level schedules can be evolved explicitly".into(),
        ));
    }
    let mut flipped = false;
    let mut out = Vec::new();
    for seg in &schedule.segments {
        let want = seg.fe == 0;
        if want != flipped {
            out.push(QubitStep::Pi);
            flipped = want;
        }
        out.push(QubitStep::Evolve {
            dt: seg.dt,
            delta: seg.delta,
        });
    }
    if flipped {
        out.push(QubitStep::Pi);
    }
    Ok(out)
}

/// `pi/2 (phi)`, the window, then `pi/2 (0)`.
pub fn ramsey_steps(spec: &MeasurementSpec) -> Result<Vec<QubitStep>> {
    spec.validate()?;
    let mut out = alloc::vec![QubitStep::HalfPi { phase: spec.phi }];
    out.extend(window_steps(&spec.schedule)?);
    out.push(QubitStep::HalfPi { phase: 0.0 });
    Ok(out)
}

/// Full Ramsey sequence followed by projective readout; `+` is the excited outcome.
pub fn ramsey_readout(
    rho: &FockDensity,
    spec: &MeasurementSpec,
    params: &SystemParams,
) -> Result<KrausOutcome> {
    let s = evolve_sequence(&JointState::ground_qubit(rho), &ramsey_steps(spec)?, params)?;
    Ok(KrausOutcome::from_unnormalized(s.ee, s.gg))
}
