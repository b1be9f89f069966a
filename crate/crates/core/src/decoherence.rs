//! Damping and thermal noise on the oscillator, plus qubit dephasing.
//!
//! The oscillator obeys the thermal Lindblad equation with rate `gamma` and
//! bath occupation `n_eq`. All amplitudes here live in the frame co-rotating
//! with the oscillator.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phase_space::{ComplexAmp, OscillatorState};
use crate::pulses::{PulseSchedule, SystemParams};
use crate::ramsey::MeasurementSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathParams {
    /// Energy damping rate of the oscillator.
    pub gamma: f64,
    /// Thermal occupation of the bath.
    pub n_eq: f64,
    /// Qubit dephasing time; `f64::INFINITY` disables dephasing.
    #[cfg_attr(feature = "serde", serde(with = "t2_serde", default = "infinite"))]
    pub t2: f64,
}

#[cfg(feature = "serde")]
fn infinite() -> f64 {
    f64::INFINITY
}

#[cfg(feature = "serde")]
mod t2_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(t2: &f64, s: S) -> Result<S::Ok, S::Error> {
        t2.is_finite().then_some(*t2).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl BathParams {
    pub fn new(gamma: f64, n_eq: f64, t2: f64) -> Result<Self> {
        let b = Self { gamma, n_eq, t2 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::arg("gamma must be finite and >= 0"));
        }
        if !(self.n_eq.is_finite() && self.n_eq >= 0.0) {
            return Err(Error::arg("n_eq must be finite and >= 0"));
        }
        if self.t2.is_nan() || self.t2 <= 0.0 {
            return Err(Error::arg("t2 must be positive"));
        }
        Ok(())
    }

    /// Thermal decoherence rate `gamma * n_eq`.
    pub fn gamma_th(&self) -> f64 {
        self.gamma * self.n_eq
    }

    pub fn dephasing_rate(&self) -> f64 {
        if self.t2.is_finite() {
            1.0 / self.t2
        } else {
            0.0
        }
    }

    /// `nu = 1 + 2 N (1 - e^{-gamma dt})`, the thermal broadening after `dt`.
    pub fn nu(&self, dt: f64) -> f64 {
        1.0 + 2.0 * self.n_eq * (1.0 - (-self.gamma * dt).exp())
    }
}

/// Two-time correlator when the oscillator decays for `dt` between the
/// windows. `coherent` evaluates the undamped correlator for a given second
/// amplitude; it is called with `alpha2 e^{-gamma dt / 2}`.
pub fn decayed_two_time(
    alpha2: ComplexAmp,
    dt: f64,
    bath: &BathParams,
    coherent: impl FnOnce(ComplexAmp) -> f64,
) -> Result<f64> {
    bath.validate()?;
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::arg("waiting time must be finite and >= 0"));
    }
    let decay = (-bath.gamma * dt).exp();
    let blur = (-(bath.n_eq + 0.5) * alpha2.norm_sqr() * (1.0 - decay)).exp();
    Ok(blur * coherent(alpha2 * decay.sqrt()))
}

/// Rectangular sampling grid for Wigner functions over `xi = x + i p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    /// Square grid centred on `center` with half-width `half`.
    pub fn centered(center: ComplexAmp, half: f64, n: usize) -> Self {
        Self {
            x_min: center.re - half,
            x_max: center.re + half,
            nx: n,
            p_min: center.im - half,
            p_max: center.im + half,
            np: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |a: f64, b: f64, n: usize| {
            a.is_finite() && b.is_finite() && (n == 1 || (n >= 2 && b > a))
        };
        if self.nx == 0
            || self.np == 0
            || !ok(self.x_min, self.x_max, self.nx)
            || !ok(self.p_min, self.p_max, self.np)
        {
            return Err(Error::arg("invalid Wigner grid"));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        Self::axis(self.x_min, self.x_max, self.nx, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        Self::axis(self.p_min, self.p_max, self.np, j)
    }

    /// Point `(i, j)` as a complex amplitude.
    pub fn point(&self, i: usize, j: usize) -> ComplexAmp {
        Complex64::new(self.x(i), self.p(j))
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Wigner values on a [`GridSpec`], stored row by row (`p` outer, `x` inner)
/// and normalized so that `int W dx dp = 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    /// Trapezoidal quadrature of the grid values.
    pub fn integral(&self) -> f64 {
        let s = &self.spec;
        if s.nx < 2 || s.np < 2 {
            return 0.0;
        }
        let hx = (s.x_max - s.x_min) / (s.nx - 1) as f64;
        let hp = (s.p_max - s.p_min) / (s.np - 1) as f64;
        let w = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let mut acc = 0.0;
        for j in 0..s.np {
            for i in 0..s.nx {
                acc += w(i, s.nx) * w(j, s.np) * self.get(i, j);
            }
        }
        acc * hx * hp
    }
}

/// Closed-form Wigner function of the conditioned cat `(|0> + e^{i phibar}|alpha>)`
/// after decaying for `dt`.
#[derive(Debug, Clone, Copy)]
pub struct DecayedCat {
    alpha: ComplexAmp,
    phibar: f64,
    norm: f64,
    nu: f64,
    fringe: f64,
}

impl DecayedCat {
    pub fn new(
        alpha1: ComplexAmp,
        phibar1: f64,
        p_plus: f64,
        dt: f64,
        bath: &BathParams,
    ) -> Result<Self> {
        bath.validate()?;
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::arg("waiting time must be finite and >= 0"));
        }
        let expect = 0.5 * (1.0 + phibar1.cos() * (-0.5 * alpha1.norm_sqr()).exp());
        if !p_plus.is_finite() || (p_plus - expect).abs() > 1e-6 {
            return Err(Error::arg("p_plus is inconsistent with alpha1 and phibar1"));
        }
        let decay = (-bath.gamma * dt).exp();
        let nu = bath.nu(dt);
        Ok(Self {
            alpha: alpha1 * decay.sqrt(),
            phibar: phibar1,
            norm: 1.0 / (2.0 * PI * nu * p_plus),
            nu,
            fringe: (-0.5 * alpha1.norm_sqr() * (1.0 - decay / nu)).exp(),
        })
    }

    /// Suppression of the interference term relative to the pure cat.
    pub fn fringe_factor(&self) -> f64 {
        self.fringe
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eval(&self, xi: ComplexAmp) -> f64 {
        let g = |z: Complex64| (-2.0 * z.norm_sqr() / self.nu).exp();
        let a = self.alpha;
        let arg = self.phibar + 2.0 / self.nu * (xi.conj() * a).im;
        self.norm * (g(xi) + g(xi - a) + 2.0 * g(xi - 0.5 * a) * self.fringe * arg.cos())
    }

    /// The two Gaussian lobes without the interference term.
    pub fn eval_mixture(&self, xi: ComplexAmp) -> f64 {
        let g = |z: Complex64| (-2.0 * z.norm_sqr() / self.nu).exp();
        self.norm * (g(xi) + g(xi - self.alpha))
    }
}

/// Evaluates [`DecayedCat`] on a grid.
pub fn cat_wigner(
    alpha1: ComplexAmp,
    phibar1: f64,
    p_plus: f64,
    dt: f64,
    bath: &BathParams,
    grid: &GridSpec,
) -> Result<WignerGrid> {
    grid.validate()?;
    let cat = DecayedCat::new(alpha1, phibar1, p_plus, dt, bath)?;
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.np {
        for i in 0..grid.nx {
            values.push(cat.eval(grid.point(i, j)));
        }
    }
    Ok(WignerGrid {
        spec: *grid,
        values,
    })
}

/// State of the measurement-window equations at the end of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSolution {
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    /// Accumulated thermal dephasing exponent.
    pub zeta: f64,
    /// Accumulated qubit phase.
    pub phi: f64,
    pub duration: f64,
}

/// Propagates `d alpha/dt = -kappa alpha + c` exactly over `h`; returns the
/// final value and `int_0^h alpha`.
fn linear_step(a0: Complex64, c: Complex64, kappa: Complex64, h: f64) -> (Complex64, Complex64) {
    let ainf = c / kappa;
    let x = kappa * h;
    let e = (-x).exp();
    // (1 - e^{-x}) / kappa, with a series for tiny |x|
    let frac = if x.norm() < 1e-4 {
        Complex64::new(h, 0.0) * (1.0 - x / 2.0 + x * x / 6.0)
    } else {
        (1.0 - e) / kappa
    };
    (ainf + (a0 - ainf) * e, ainf * h + (a0 - ainf) * frac)
}

/// Solves the window equations segment by segment:
/// `a+' = -(i w + G/2) a+ - i l f+ / 2`, `a-' = -(i w + G/2) a- + i l f-`,
/// `zeta' = 2 l f- Im a-`, `phi' = -f- Delta - 2 l f- Re a+`.
pub fn solve_window(
    schedule: &PulseSchedule,
    params: &SystemParams,
    bath: &BathParams,
) -> Result<WindowSolution> {
    schedule.validate()?;
    params.validate()?;
    bath.validate()?;
    let kappa = Complex64::new(0.5 * bath.gamma, params.omega);
    let l = params.lambda;
    let mut ap = Complex64::new(0.0, 0.0);
    let mut am = Complex64::new(0.0, 0.0);
    let (mut zeta, mut phi) = (0.0, 0.0);
    for s in &schedule.segments {
        let fp = f64::from(s.fe + s.fg);
        let fm = f64::from(s.fe - s.fg);
        let (ap1, ip) = linear_step(ap, Complex64::new(0.0, -0.5 * l * fp), kappa, s.dt);
        let (am1, im) = linear_step(am, Complex64::new(0.0, l * fm), kappa, s.dt);
        zeta += 2.0 * l * fm * im.im;
        phi += -fm * s.delta * s.dt - 2.0 * l * fm * ip.re;
        ap = ap1;
        am = am1;
    }
    Ok(WindowSolution {
        alpha_plus: ap,
        alpha_minus: am,
        zeta,
        phi,
        duration: schedule.duration(),
    })
}

/// `<Z>` of a single measurement whose window is exposed to the bath, for an
/// oscillator starting in equilibrium with that bath.
pub fn measurement_window_expectation(
    spec: &MeasurementSpec,
    params: &SystemParams,
    bath: &BathParams,
    state: &OscillatorState,
) -> Result<f64> {
    spec.validate()?;
    match state {
        OscillatorState::Thermal { nbar }
            if (nbar - bath.n_eq).abs() <= 1e-12 * bath.n_eq.max(1.0) => {}
        _ => {
            return Err(Error::UnsupportedState(
                "window decoherence needs a thermal state at the bath occupation".into(),
            ))
        }
    }
    let w = solve_window(&spec.schedule, params, bath)?;
    Ok((spec.phi + w.phi).cos()
        * (-w.duration * bath.dephasing_rate()).exp()
        * (-(bath.n_eq + 0.5) * w.zeta).exp())
}

/// Weak-damping approximation of `zeta` for a static window of length `t`:
/// `2 l^2 / w^2 [(1 - cos(w t) e^{-G t / 2}) + G t / 2]`.
pub fn zeta_weak_damping(t: f64, params: &SystemParams, bath: &BathParams) -> f64 {
    let r = params.lambda / params.omega;
    2.0 * r
        * r
        * ((1.0 - (params.omega * t).cos() * (-0.5 * bath.gamma * t).exp()) + 0.5 * bath.gamma * t)
}

/// Headline decoherence rate next to the rate actually realized by the
/// window equations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecoherenceRate {
    /// `1/T2 + (2N + 1) gamma`.
    pub quoted: f64,
    /// Least-squares slope of `t/T2 + (N + 1/2) zeta(t)` over `omega t` in `[20 pi, 40 pi]`.
    pub fitted: f64,
}

pub fn effective_decoherence_rate(
    params: &SystemParams,
    bath: &BathParams,
) -> Result<DecoherenceRate> {
    params.validate()?;
    bath.validate()?;
    let quoted = bath.dephasing_rate() + (2.0 * bath.n_eq + 1.0) * bath.gamma;
    let mut pts = Vec::new();
    for k in 10..=20 {
        let t = TAU * k as f64 / params.omega;
        let w = solve_window(&PulseSchedule::static_window(t)?, params, bath)?;
        pts.push((t, t * bath.dephasing_rate() + (bath.n_eq + 0.5) * w.zeta));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(DecoherenceRate {
        quoted,
        fitted: sxy / sxx,
    })
}
