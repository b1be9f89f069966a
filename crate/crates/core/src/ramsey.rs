//! Ramsey measurements: single-shot expectations, conditioned states and
//! n-point correlation functions.
//!
//! Amplitudes are kept in the frame co-rotating with the oscillator: a window
//! ending at `t_end` acts through `alpha_x(tau) e^{i omega t_end}`, so free
//! evolution between windows never has to be applied explicitly.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phase_space::{CatComponent, ComplexAmp, OscillatorState};
use crate::pulses::{integrate_schedule, PulseSchedule, SystemParams};
use crate::stats::CompensatedComplexSum;

/// Largest number of measurements handled by the expansion in [`correlation`].
pub const MAX_CORRELATION_ORDER: usize = 20;

/// Conditioned states with a smaller probability are reported as undefined.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

const TIME_TOL: f64 = 1e-9;
const COMMUTE_TOL: f64 = 1e-10;

/// One Ramsey measurement: pulse phase, window length, completion time and
/// the schedule applied during the window.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasurementSpec {
    pub phi: f64,
    pub tau: f64,
    pub t_end: f64,
    pub schedule: PulseSchedule,
}

impl MeasurementSpec {
    pub fn new(phi: f64, t_end: f64, schedule: PulseSchedule) -> Result<Self> {
        let s = Self {
            phi,
            tau: schedule.duration(),
            t_end,
            schedule,
        };
        s.validate()?;
        Ok(s)
    }

    /// Static coupling over the whole window.
    pub fn static_window(phi: f64, tau: f64, t_end: f64) -> Result<Self> {
        Self::new(phi, t_end, PulseSchedule::static_window(tau)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !self.phi.is_finite() || !self.t_end.is_finite() {
            return Err(Error::arg("measurement phase and time must be finite"));
        }
        let d = self.schedule.duration();
        if (self.tau - d).abs() > TIME_TOL * d.max(1.0) {
            return Err(Error::arg("tau differs from the schedule duration"));
        }
        if self.t_end < self.tau - TIME_TOL * self.tau.max(1.0) {
            return Err(Error::arg("t_end must not precede the window length"));
        }
        Ok(())
    }

    pub fn t_start(&self) -> f64 {
        self.t_end - self.tau
    }

    /// Branch amplitudes in the co-rotating frame and the superoperator phase.
    pub fn resolve(&self, params: &SystemParams) -> Result<ResolvedMeasurement> {
        self.validate()?;
        let r = integrate_schedule(params, &self.schedule)?;
        let rot = Complex64::from_polar(1.0, params.omega * self.t_end);
        Ok(ResolvedMeasurement {
            alpha_e: r.alpha_e * rot,
            alpha_g: r.alpha_g * rot,
            phase: self.phi + r.phi_e - r.phi_g,
        })
    }
}

/// A measurement reduced to `Q rho = [e^{i phase} D(alpha_e) rho D(alpha_g)^dag + h.c.] / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResolvedMeasurement {
    pub alpha_e: ComplexAmp,
    pub alpha_g: ComplexAmp,
    pub phase: f64,
}

impl ResolvedMeasurement {
    /// Measurement that only displaces the excited branch, by `alpha`, with total phase `phibar`.
    pub fn from_relative(alpha: ComplexAmp, phibar: f64) -> Self {
        Self {
            alpha_e: alpha,
            alpha_g: Complex64::new(0.0, 0.0),
            phase: phibar,
        }
    }

    pub fn alpha(&self) -> ComplexAmp {
        self.alpha_e - self.alpha_g
    }

    /// `phase - Im(alpha_g alpha_e*)`, the phase multiplying `D(alpha)`.
    pub fn phibar(&self) -> f64 {
        self.phase - (self.alpha_g * self.alpha_e.conj()).im
    }
}

/// Probability of one readout outcome and the state it leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedOutcome {
    pub probability: f64,
    /// `None` when the outcome probability is below [`MIN_BRANCH_PROBABILITY`].
    pub state: Option<OscillatorState>,
}

/// An ordered list of measurements on a common initial state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationRequest {
    pub specs: Vec<MeasurementSpec>,
    pub initial: OscillatorState,
}

impl CorrelationRequest {
    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::arg("correlation needs at least one measurement"));
        }
        self.initial.validate()?;
        for (i, s) in self.specs.iter().enumerate() {
            s.validate()?;
            if i > 0 {
                let prev = &self.specs[i - 1];
                if s.t_end <= prev.t_end {
                    return Err(Error::Argument(format!(
                        "measurement {i} does not end after measurement {}",
                        i - 1
                    )));
                }
                if s.t_start() < prev.t_end - TIME_TOL * prev.t_end.abs().max(1.0) {
                    return Err(Error::Argument(format!(
                        "measurement {i} overlaps measurement {}",
                        i - 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, params: &SystemParams) -> Result<Vec<ResolvedMeasurement>> {
        self.validate()?;
        self.specs.iter().map(|s| s.resolve(params)).collect()
    }
}

/// `<Z>` of one measurement, `Re(e^{i phibar} <D(alpha)>)`.
pub fn single_expectation(
    state: &OscillatorState,
    spec: &MeasurementSpec,
    params: &SystemParams,
) -> Result<f64> {
    state.validate()?;
    Ok(single_expectation_resolved(state, &spec.resolve(params)?))
}

pub fn single_expectation_resolved(state: &OscillatorState, m: &ResolvedMeasurement) -> f64 {
    (Complex64::from_polar(1.0, m.phibar()) * state.characteristic(m.alpha())).re
}

/// Applies both Kraus operators to a pure state in the co-rotating frame.
///
/// Each input component `w |a>` maps to one component displaced by `alpha_g`
/// and one displaced by `alpha_e`, so the output has twice as many components.
pub fn measure_conditioned(
    state: &OscillatorState,
    spec: &MeasurementSpec,
    params: &SystemParams,
) -> Result<(ConditionedOutcome, ConditionedOutcome)> {
    measure_conditioned_resolved(state, &spec.resolve(params)?)
}

pub fn measure_conditioned_resolved(
    state: &OscillatorState,
    m: &ResolvedMeasurement,
) -> Result<(ConditionedOutcome, ConditionedOutcome)> {
    state.validate()?;
    let comps = state.components().ok_or_else(|| {
        Error::UnsupportedState(
            "conditioning a thermal state has no finite superposition form".into(),
        )
    })?;
    let branch = |sign: f64| {
        let mut out = Vec::with_capacity(2 * comps.len());
        for c in &comps {
            let ph = (m.alpha_g * c.amp.conj()).im;
            out.push(CatComponent::new(
                0.5 * c.weight * Complex64::from_polar(1.0, ph),
                c.amp + m.alpha_g,
            ));
        }
        for c in &comps {
            let ph = m.phase + (m.alpha_e * c.amp.conj()).im;
            out.push(CatComponent::new(
                sign * 0.5 * c.weight * Complex64::from_polar(1.0, ph),
                c.amp + m.alpha_e,
            ));
        }
        let p = crate::phase_space::superposition_norm_sqr(&out).clamp(0.0, 1.0);
        let state = if p < MIN_BRANCH_PROBABILITY {
            None
        } else {
            let s = 1.0 / p.sqrt();
            out.iter_mut().for_each(|c| c.weight *= s);
            Some(OscillatorState::Cat { components: out })
        };
        ConditionedOutcome {
            probability: p,
            state,
        }
    };
    Ok((branch(1.0), branch(-1.0)))
}

/// `C(t_1, ..., t_n) = Tr{Q_n ... Q_1 rho_0}` via the exact 2^n-term expansion.
pub fn correlation(request: &CorrelationRequest, params: &SystemParams) -> Result<f64> {
    if request.specs.len() > MAX_CORRELATION_ORDER {
        return Err(Error::Capacity {
            requested: request.specs.len(),
            limit: MAX_CORRELATION_ORDER,
        });
    }
    let ms = request.resolve(params)?;
    correlation_resolved(&ms, &request.initial)
}

#[derive(Clone, Copy)]
struct Side {
    amp: Complex64,
    phase: f64,
}

impl Side {
    fn then(self, amp: Complex64, phase: f64) -> Self {
        Side {
            amp: self.amp + amp,
            phase: self.phase + phase + (amp * self.amp.conj()).im,
        }
    }
}

fn expand(
    ms: &[ResolvedMeasurement],
    state: &OscillatorState,
    left: Side,
    right: Side,
    acc: &mut CompensatedComplexSum,
) {
    match ms.split_first() {
        None => {
            let ph = left.phase - right.phase - (right.amp * left.amp.conj()).im;
            acc.add(Complex64::from_polar(1.0, ph) * state.characteristic(left.amp - right.amp));
        }
        Some((m, rest)) => {
            expand(
                rest,
                state,
                left.then(m.alpha_e, m.phase),
                right.then(m.alpha_g, 0.0),
                acc,
            );
            expand(
                rest,
                state,
                left.then(m.alpha_g, 0.0),
                right.then(m.alpha_e, m.phase),
                acc,
            );
        }
    }
}

/// Correlation of already resolved measurements; terms are summed in a fixed
/// depth-first order with compensation, so the result is deterministic.
pub fn correlation_resolved(ms: &[ResolvedMeasurement], state: &OscillatorState) -> Result<f64> {
    if ms.is_empty() {
        return Err(Error::arg("correlation needs at least one measurement"));
    }
    if ms.len() > MAX_CORRELATION_ORDER {
        return Err(Error::Capacity {
            requested: ms.len(),
            limit: MAX_CORRELATION_ORDER,
        });
    }
    state.validate()?;
    let id = Side {
        amp: Complex64::new(0.0, 0.0),
        phase: 0.0,
    };
    let mut acc = CompensatedComplexSum::default();
    expand(ms, state, id, id, &mut acc);
    Ok(acc.value().re * 0.5f64.powi(ms.len() as i32))
}

/// Two-time correlator
/// `C = Re[e^{i(pb1+pb2+g)} <D(a1+a2)> + e^{i(pb1-pb2-g)} <D(a1-a2)>] / 2`, `g = Im(a1* a2)`.
pub fn two_time_closed_form(
    alpha1: ComplexAmp,
    alpha2: ComplexAmp,
    phibar1: f64,
    phibar2: f64,
    state: &OscillatorState,
) -> f64 {
    let gamma = (alpha2 * alpha1.conj()).im;
    two_time_terms(alpha1, alpha2, phibar1, phibar2, gamma, state)
}

/// Two-time correlator when both branches are displaced; the interference
/// phase becomes `Im(alpha_2 (alpha_e1 + alpha_g1)*)`.
pub fn modulated_two_time_closed_form(
    m1: &ResolvedMeasurement,
    m2: &ResolvedMeasurement,
    state: &OscillatorState,
) -> f64 {
    let gamma = (m2.alpha() * (m1.alpha_e + m1.alpha_g).conj()).im;
    two_time_terms(
        m1.alpha(),
        m2.alpha(),
        m1.phibar(),
        m2.phibar(),
        gamma,
        state,
    )
}

fn two_time_terms(
    a1: Complex64,
    a2: Complex64,
    p1: f64,
    p2: f64,
    gamma: f64,
    state: &OscillatorState,
) -> f64 {
    let plus = Complex64::from_polar(1.0, p1 + p2 + gamma) * state.characteristic(a1 + a2);
    let minus = Complex64::from_polar(1.0, p1 - p2 - gamma) * state.characteristic(a1 - a2);
    0.5 * (plus + minus).re
}

/// Three-point correlator as the mean of a product of modular variables;
/// valid only when the three displacements commute.
pub fn three_point_commuting(
    specs: &[MeasurementSpec; 3],
    state: &OscillatorState,
    params: &SystemParams,
) -> Result<f64> {
    let ms = [
        specs[0].resolve(params)?,
        specs[1].resolve(params)?,
        specs[2].resolve(params)?,
    ];
    three_point_commuting_resolved(&ms, state)
}

pub fn three_point_commuting_resolved(
    ms: &[ResolvedMeasurement; 3],
    state: &OscillatorState,
) -> Result<f64> {
    state.validate()?;
    for i in 0..3 {
        for j in i + 1..3 {
            let c = (ms[i].alpha().conj() * ms[j].alpha()).im;
            if c.abs() > COMMUTE_TOL {
                return Err(Error::Precondition(format!(
                    "displacements {} and {} do not commute: Im(a{}* a{}) = {c:e}",
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut acc = CompensatedComplexSum::default();
    for mask in 0..8u8 {
        let mut amp = Complex64::new(0.0, 0.0);
        let mut ph = 0.0;
        for (k, m) in ms.iter().enumerate() {
            let s = if mask >> k & 1 == 0 { 1.0 } else { -1.0 };
            amp += s * m.alpha();
            ph += s * m.phibar();
        }
        acc.add(Complex64::from_polar(1.0, ph) * state.characteristic(amp));
    }
    Ok(acc.value().re / 8.0)
}
