//! Piecewise-constant pulse schedules and their toggling-frame integrals.
//!
//! A schedule describes one interaction window. On each segment the
//! branch functions `fe`, `fg` and the detuning are constant, so the
//! displacement and phase integrals have closed forms per segment.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phase_space::ComplexAmp;

/// Oscillator frequency and qubit–oscillator coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemParams {
    pub omega: f64,
    pub lambda: f64,
}

impl SystemParams {
    pub fn new(omega: f64, lambda: f64) -> Result<Self> {
        let p = Self { omega, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::arg("omega must be finite and > 0"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::arg("lambda must be finite and >= 0"));
        }
        Ok(())
    }
}

/// One constant piece of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub dt: f64,
    pub fe: i8,
    pub fg: i8,
    pub delta: f64,
}

impl Segment {
    pub fn new(dt: f64, fe: i8, fg: i8, delta: f64) -> Self {
        Self { dt, fe, fg, delta }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseSchedule {
    pub segments: Vec<Segment>,
}

impl PulseSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let s = Self { segments };
        s.validate()?;
        Ok(s)
    }

    /// A single segment with the coupling on in the excited branch.
    pub fn static_window(tau: f64) -> Result<Self> {
        Self::new(alloc::vec![Segment::new(tau, 1, 0, 0.0)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::arg("schedule has no segments"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.dt.is_finite() && s.dt > 0.0) {
                return Err(Error::Argument(alloc::format!(
                    "segment {i}: duration must be > 0"
                )));
            }
            if !(-1..=1).contains(&s.fe) || !(-1..=1).contains(&s.fg) {
                return Err(Error::Argument(alloc::format!(
                    "segment {i}: branch functions must lie in {{-1, 0, 1}}"
                )));
            }
            if !s.delta.is_finite() {
                return Err(Error::Argument(alloc::format!(
                    "segment {i}: detuning is not finite"
                )));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).sum()
    }

    /// True when every segment has `(fe, fg)` equal to `(1, 0)` or `(0, 1)`.
    pub fn is_two_level(&self) -> bool {
        self.segments
            .iter()
            .all(|s| matches!((s.fe, s.fg), (1, 0) | (0, 1)))
    }

    /// Boundaries `t_0 = 0 < t_1 < ... < t_k = duration`.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(0.0);
        for s in &self.segments {
            t += s.dt;
            out.push(t);
        }
        out
    }
}

/// Branch displacements and phases accumulated over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DisplacementRecord {
    pub alpha_e: ComplexAmp,
    pub alpha_g: ComplexAmp,
    pub phi_e: f64,
    pub phi_g: f64,
    pub alpha_rel: ComplexAmp,
    pub phi_tot: f64,
}

/// `int_a^b e^{i omega s} ds` for every segment.
fn segment_exponentials(omega: f64, schedule: &PulseSchedule) -> Vec<(Complex64, f64)> {
    let mut a = 0.0;
    schedule
        .segments
        .iter()
        .map(|s| {
            let b = a + s.dt;
            let e = Complex64::from_polar(
                2.0 * (0.5 * omega * s.dt).sin() / omega,
                0.5 * omega * (a + b),
            );
            a = b;
            (e, s.dt)
        })
        .collect()
}

/// `(omega L - sin(omega L)) / omega^2` without cancellation at small `omega L`.
fn self_term(omega: f64, len: f64) -> f64 {
    let x = omega * len;
    let v = if x.abs() < 1e-2 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x - x.sin()
    };
    v / (omega * omega)
}

/// `int_0^T ds1 g(s1) int_0^s1 ds2 h(s2) sin(omega (s1 - s2))`.
fn double_integral(
    omega: f64,
    ex: &[(Complex64, f64)],
    g: impl Fn(usize) -> f64,
    h: impl Fn(usize) -> f64,
) -> f64 {
    let mut acc = 0.0;
    let mut inner = Complex64::new(0.0, 0.0);
    for (i, &(e, len)) in ex.iter().enumerate() {
        let gi = g(i);
        let hi = h(i);
        if gi != 0.0 {
            acc += gi * ((e * inner).im + hi * self_term(omega, len));
        }
        inner += hi * e.conj();
    }
    acc
}

fn detuning_integral(schedule: &PulseSchedule, f: impl Fn(&Segment) -> f64) -> f64 {
    schedule
        .segments
        .iter()
        .map(|s| f(s) * s.delta * s.dt)
        .sum()
}

/// Closed-form displacements and phases of both qubit branches.
pub fn integrate_schedule(
    params: &SystemParams,
    schedule: &PulseSchedule,
) -> Result<DisplacementRecord> {
    params.validate()?;
    schedule.validate()?;
    let (omega, lambda) = (params.omega, params.lambda);
    let ex = segment_exponentials(omega, schedule);
    let seg = &schedule.segments;

    let mut te = Complex64::new(0.0, 0.0);
    let mut tg = Complex64::new(0.0, 0.0);
    for (s, &(e, _)) in seg.iter().zip(&ex) {
        te += f64::from(s.fe) * e;
        tg += f64::from(s.fg) * e;
    }
    let rot =
        Complex64::new(0.0, -lambda) * Complex64::from_polar(1.0, -omega * schedule.duration());
    let alpha_e = rot * te;
    let alpha_g = rot * tg;

    let l2 = lambda * lambda;
    let fe = |i: usize| f64::from(seg[i].fe);
    let fg = |i: usize| f64::from(seg[i].fg);
    let phi_e =
        l2 * double_integral(omega, &ex, fe, fe) - detuning_integral(schedule, |s| f64::from(s.fe));
    let phi_g =
        l2 * double_integral(omega, &ex, fg, fg) - detuning_integral(schedule, |s| f64::from(s.fg));
    let phi_tot = phi_e - phi_g - (alpha_g * alpha_e.conj()).im;

    Ok(DisplacementRecord {
        alpha_e,
        alpha_g,
        phi_e,
        phi_g,
        alpha_rel: alpha_e - alpha_g,
        phi_tot,
    })
}

/// Relative phase from the mixed integral `lambda^2 I[f-, f+] - int f- Delta`,
/// an independent route to `DisplacementRecord::phi_tot`.
pub fn combined_phase(params: &SystemParams, schedule: &PulseSchedule) -> Result<f64> {
    params.validate()?;
    schedule.validate()?;
    let ex = segment_exponentials(params.omega, schedule);
    let seg = &schedule.segments;
    let fm = |i: usize| f64::from(seg[i].fe - seg[i].fg);
    let fp = |i: usize| f64::from(seg[i].fe + seg[i].fg);
    Ok(
        params.lambda * params.lambda * double_integral(params.omega, &ex, fm, fp)
            - detuning_integral(schedule, |s| f64::from(s.fe - s.fg)),
    )
}

fn half_period_train(
    params: &SystemParams,
    intervals: usize,
    level: impl Fn(usize) -> (i8, i8),
) -> Result<PulseSchedule> {
    params.validate()?;
    let dt = PI / params.omega;
    PulseSchedule::new(
        (0..intervals)
            .map(|k| {
                let (fe, fg) = level(k);
                Segment::new(dt, fe, fg, 0.0)
            })
            .collect(),
    )
}

/// Resonant echo train of `n` half-period intervals with the qubit flipped
/// between consecutive intervals (`n - 1` flips, duration `n pi / omega`).
///
/// Every interval adds `2 lambda / omega` coherently, so
/// `alpha_rel = (-1)^n 2 n lambda / omega`. `n = 0` is treated as `n = 1`,
/// the plain static half-period window.
pub fn resonant_train(params: &SystemParams, n: usize) -> Result<PulseSchedule> {
    half_period_train(
        params,
        n.max(1),
        |k| if k % 2 == 0 { (1, 0) } else { (0, 1) },
    )
}

/// Three-level echo: `fg = -1` throughout while `fe` alternates between 1 and
/// 0 every half period. `n` is the number of half-period intervals and must
/// be a positive even number, so the window spans whole oscillator periods
/// and `alpha_g` vanishes.
pub fn asymmetric_schedule(params: &SystemParams, n: usize) -> Result<PulseSchedule> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::arg(
            "asymmetric schedule needs an even, non-zero number of half periods",
        ));
    }
    half_period_train(params, n, |k| (if k % 2 == 0 { 1 } else { 0 }, -1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(lambda: f64) -> SystemParams {
        SystemParams::new(1.0, lambda).unwrap()
    }

    #[test]
    fn static_window_matches_closed_form() {
        let p = SystemParams::new(1.3, 0.4).unwrap();
        let tau = 2.1;
        let r = integrate_schedule(&p, &PulseSchedule::static_window(tau).unwrap()).unwrap();
        let expect = (p.lambda / p.omega) * (Complex64::from_polar(1.0, -p.omega * tau) - 1.0);
        assert!((r.alpha_rel - expect).norm() < 1e-14);
        let x = p.omega * tau;
        assert_abs_diff_eq!(
            r.phi_tot,
            (p.lambda / p.omega).powi(2) * (x - x.sin()),
            epsilon = 1e-14
        );
        assert_eq!(r.alpha_g, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn full_period_closes_the_loop() {
        let p = params(0.5);
        let r = integrate_schedule(&p, &PulseSchedule::static_window(2.0 * PI).unwrap()).unwrap();
        assert!(r.alpha_rel.norm() < 1e-15);
        assert_abs_diff_eq!(r.phi_tot, PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn no_coupling_leaves_only_detuning() {
        let s = PulseSchedule::new(alloc::vec![
            Segment::new(0.5, 1, 0, 2.0),
            Segment::new(1.5, 0, 1, -1.0),
        ])
        .unwrap();
        let r = integrate_schedule(&params(0.0), &s).unwrap();
        assert_eq!(r.alpha_e, Complex64::new(0.0, 0.0));
        assert_eq!(r.alpha_g, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(r.phi_e, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.phi_g, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn resonant_train_amplifies() {
        let p = params(0.1);
        for (n, want) in [(0usize, -0.2), (1, -0.2), (4, 0.8), (5, -1.0)] {
            let r = integrate_schedule(&p, &resonant_train(&p, n).unwrap()).unwrap();
            assert!(
                (r.alpha_rel - Complex64::new(want, 0.0)).norm() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn asymmetric_schedule_cancels_ground_branch() {
        let p = params(0.1);
        let r = integrate_schedule(&p, &asymmetric_schedule(&p, 2).unwrap()).unwrap();
        assert!(r.alpha_g.norm() < 1e-12);
        assert!((r.alpha_e - Complex64::new(0.2, 0.0)).norm() < 1e-12);
        let r = integrate_schedule(&params(0.0), &asymmetric_schedule(&p, 4).unwrap()).unwrap();
        assert_eq!(r.alpha_e, Complex64::new(0.0, 0.0));
        assert!(asymmetric_schedule(&p, 3).is_err());
        assert!(asymmetric_schedule(&p, 0).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PulseSchedule::new(alloc::vec![]).is_err());
        assert!(PulseSchedule::new(alloc::vec![Segment::new(0.0, 1, 0, 0.0)]).is_err());
        assert!(PulseSchedule::new(alloc::vec![Segment::new(1.0, 2, 0, 0.0)]).is_err());
        assert!(SystemParams::new(0.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, f64::NAN).is_err());
    }

    fn schedule(two_level: bool) -> impl Strategy<Value = PulseSchedule> {
        proptest::collection::vec((0.01f64..3.0, 0u8..3, -2.0f64..2.0), 1..10).prop_map(move |v| {
            PulseSchedule::new(
                v.into_iter()
                    .map(|(dt, k, d)| {
                        let (fe, fg) = if two_level {
                            if k % 2 == 0 {
                                (1, 0)
                            } else {
                                (0, 1)
                            }
                        } else {
                            ((k as i8) - 1, 1 - (k as i8 % 2) * 2)
                        };
                        Segment::new(dt, fe, fg, d)
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn branch_sum_is_pattern_independent(s in schedule(true), lambda in 0.0f64..2.0, omega in 0.2f64..3.0) {
            let p = SystemParams::new(omega, lambda).unwrap();
            let r = integrate_schedule(&p, &s).unwrap();
            let want = (lambda / omega) * (Complex64::from_polar(1.0, -omega * s.duration()) - 1.0);
            prop_assert!((r.alpha_e + r.alpha_g - want).norm() < 1e-12);
        }

        #[test]
        fn splitting_a_segment_changes_nothing(s in schedule(false), idx in 0usize..10, frac in 0.05f64..0.95) {
            let p = SystemParams::new(1.1, 0.7).unwrap();
            let idx = idx % s.segments.len();
            let mut segs = s.segments.clone();
            let orig = segs[idx];
            segs[idx].dt = orig.dt * frac;
            segs.insert(idx + 1, Segment { dt: orig.dt * (1.0 - frac), ..orig });
            let a = integrate_schedule(&p, &s).unwrap();
            let b = integrate_schedule(&p, &PulseSchedule::new(segs).unwrap()).unwrap();
            prop_assert!((a.alpha_e - b.alpha_e).norm() < 1e-12);
            prop_assert!((a.alpha_g - b.alpha_g).norm() < 1e-12);
            prop_assert!((a.phi_e - b.phi_e).abs() < 1e-12);
            prop_assert!((a.phi_g - b.phi_g).abs() < 1e-12);
            prop_assert!((a.phi_tot - b.phi_tot).abs() < 1e-12);
        }

        #[test]
        fn branch_phases_agree_with_mixed_integral(s in schedule(false), lambda in 0.0f64..2.0) {
            let p = SystemParams::new(0.9, lambda).unwrap();
            let r = integrate_schedule(&p, &s).unwrap();
            prop_assert!((r.phi_tot - combined_phase(&p, &s).unwrap()).abs() < 1e-10);
        }
    }
}
