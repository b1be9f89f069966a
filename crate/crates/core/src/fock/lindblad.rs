//! Lindblad integration by fixed-step RK4 with step halving.
//!
//! Propagation runs in the interaction picture of `omega a^dag a`, where the
//! oscillator dissipator is unchanged and the coupling picks up `e^{+-i omega t}`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{conjugate_diag, free_phases, require_dim, thermal_levels, CMatrix, FockDensity};
use crate::decoherence::BathParams;
use crate::error::{Error, Result};
use crate::pulses::SystemParams;
use crate::ramsey::MeasurementSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOpts {
    /// Bound on `sqrt(dim) * ||rho_h - rho_{h/2}||_F` between successive halvings.
    pub tol: f64,
    pub max_halvings: u32,
}

impl Default for LindbladOpts {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_halvings: 14,
        }
    }
}

/// Qubit-branch coupling `f (Delta + lambda x)` acting from one side.
#[derive(Debug, Clone, Copy)]
struct Branch {
    f: f64,
    delta: f64,
}

#[derive(Debug, Clone)]
struct Generator {
    d: usize,
    sq: Vec<f64>,
    // diagonal of the truncated a a^dag
    aad: Vec<f64>,
    down: f64,
    up: f64,
    kappa: f64,
    omega: f64,
    lambda: f64,
    left: Option<Branch>,
    right: Option<Branch>,
}

impl Generator {
    fn new(d: usize, params: &SystemParams, bath: &BathParams) -> Self {
        Self {
            d,
            sq: (0..=d).map(|k| (k as f64).sqrt()).collect(),
            aad: (0..d)
                .map(|m| if m + 1 < d { (m + 1) as f64 } else { 0.0 })
                .collect(),
            down: bath.gamma * (bath.n_eq + 1.0),
            up: bath.gamma * bath.n_eq,
            kappa: 0.0,
            omega: params.omega,
            lambda: params.lambda,
            left: None,
            right: None,
        }
    }

    fn eval(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        let sq = &self.sq;
        let rot = Complex64::from_polar(1.0, -self.omega * t);
        let (em, ep) = (rot, rot.conj());
        let i = Complex64::new(0.0, 1.0);
        for m in 0..d {
            for n in 0..d {
                let at = |a: usize, b: usize| x[a * d + b];
                let xmn = at(m, n);
                let mut v = -self.kappa * xmn;
                let mut diss = -0.5
                    * (self.down * (m + n) as f64 + self.up * (self.aad[m] + self.aad[n]))
                    * xmn;
                if m + 1 < d && n + 1 < d {
                    diss += self.down * sq[m + 1] * sq[n + 1] * at(m + 1, n + 1);
                }
                if m > 0 && n > 0 {
                    diss += self.up * sq[m] * sq[n] * at(m - 1, n - 1);
                }
                v += diss;
                if let Some(b) = self.left {
                    if b.f != 0.0 {
                        let mut ax = Complex64::new(0.0, 0.0);
                        if m + 1 < d {
                            ax += em * sq[m + 1] * at(m + 1, n);
                        }
                        if m > 0 {
                            ax += ep * sq[m] * at(m - 1, n);
                        }
                        v -= i * b.f * (b.delta * xmn + self.lambda * ax);
                    }
                }
                if let Some(b) = self.right {
                    if b.f != 0.0 {
                        let mut xa = Complex64::new(0.0, 0.0);
                        if n > 0 {
                            xa += em * sq[n] * at(m, n - 1);
                        }
                        if n + 1 < d {
                            xa += ep * sq[n + 1] * at(m, n + 1);
                        }
                        v += i * b.f * (b.delta * xmn + self.lambda * xa);
                    }
                }
                out[m * d + n] = v;
            }
        }
    }
}

/// One piece of constant generator structure lasting `dt`.
struct Piece {
    dt: f64,
    gen: Generator,
}

fn rk4(pieces: &[Piece], x0: &[Complex64], h: f64) -> Vec<Complex64> {
    let len = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![Complex64::new(0.0, 0.0); len],
        vec![Complex64::new(0.0, 0.0); len],
        vec![Complex64::new(0.0, 0.0); len],
        vec![Complex64::new(0.0, 0.0); len],
    );
    let mut tmp = vec![Complex64::new(0.0, 0.0); len];
    let mut t0 = 0.0;
    for p in pieces {
        let steps = (p.dt / h).ceil().max(1.0) as usize;
        let hh = p.dt / steps as f64;
        for s in 0..steps {
            let t = t0 + s as f64 * hh;
            p.gen.eval(t, &x, &mut k1);
            for j in 0..len {
                tmp[j] = x[j] + 0.5 * hh * k1[j];
            }
            p.gen.eval(t + 0.5 * hh, &tmp, &mut k2);
            for j in 0..len {
                tmp[j] = x[j] + 0.5 * hh * k2[j];
            }
            p.gen.eval(t + 0.5 * hh, &tmp, &mut k3);
            for j in 0..len {
                tmp[j] = x[j] + hh * k3[j];
            }
            p.gen.eval(t + hh, &tmp, &mut k4);
            for j in 0..len {
                x[j] += hh / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        t0 += p.dt;
    }
    x
}

/// Halves the step from `h0 = 0.02 / max(omega, gamma (N + 1) dim)` until
/// two successive results agree.
fn integrate(
    pieces: &[Piece],
    x0: &CMatrix,
    params: &SystemParams,
    bath: &BathParams,
    opts: &LindbladOpts,
) -> Result<CMatrix> {
    let d = x0.dim();
    let mut h = 0.02 / params.omega.max(bath.gamma * (bath.n_eq + 1.0) * d as f64);
    let mut prev = rk4(pieces, x0.as_slice(), h);
    for _ in 0..opts.max_halvings {
        h *= 0.5;
        let next = rk4(pieces, x0.as_slice(), h);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if (d as f64).sqrt() * diff < opts.tol {
            let mut out = CMatrix::zeros(d);
            out.as_mut_slice().copy_from_slice(&next);
            return Ok(out);
        }
        prev = next;
    }
    Err(Error::Precondition(
        "Lindblad step halving did not converge".into(),
    ))
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::arg("propagation time must be finite and >= 0"));
    }
    Ok(())
}

/// Lab-frame oscillator propagation of any operator (not necessarily a state).
pub(crate) fn propagate_operator(
    x: &CMatrix,
    t: f64,
    params: &SystemParams,
    bath: &BathParams,
    opts: &LindbladOpts,
) -> Result<CMatrix> {
    check_time(t)?;
    let free = free_phases(x.dim(), params.omega, t);
    if t == 0.0 || bath.gamma == 0.0 {
        return Ok(conjugate_diag(x, &free));
    }
    let pieces = [Piece {
        dt: t,
        gen: Generator::new(x.dim(), params, bath),
    }];
    Ok(conjugate_diag(
        &integrate(&pieces, x, params, bath, opts)?,
        &free,
    ))
}

/// Evolves the oscillator alone under `omega a^dag a` and the thermal
/// damping of `bath` for time `t`.
pub fn lindblad_propagate(
    rho: &FockDensity,
    t: f64,
    params: &SystemParams,
    bath: &BathParams,
) -> Result<FockDensity> {
    lindblad_propagate_with(rho, t, params, bath, &LindbladOpts::default())
}

pub fn lindblad_propagate_with(
    rho: &FockDensity,
    t: f64,
    params: &SystemParams,
    bath: &BathParams,
    opts: &LindbladOpts,
) -> Result<FockDensity> {
    params.validate()?;
    bath.validate()?;
    require_dim(rho.dim(), thermal_levels(bath.n_eq))?;
    let out = FockDensity::from_matrix_unchecked(propagate_operator(
        rho.matrix(),
        t,
        params,
        bath,
        opts,
    )?);
    out.check_tail()?;
    Ok(out)
}

/// `<Z>` of one measurement whose window is exposed to the bath, from the
/// coherence block `<e|rho|g>` of the qubit-oscillator state. The oscillator
/// starts thermal at the bath occupation; `pi` flips act in the toggling frame.
pub fn window_expectation_oracle(
    spec: &MeasurementSpec,
    params: &SystemParams,
    bath: &BathParams,
    dim: usize,
) -> Result<f64> {
    window_expectation_oracle_with(spec, params, bath, dim, &LindbladOpts::default())
}

pub fn window_expectation_oracle_with(
    spec: &MeasurementSpec,
    params: &SystemParams,
    bath: &BathParams,
    dim: usize,
    opts: &LindbladOpts,
) -> Result<f64> {
    spec.validate()?;
    params.validate()?;
    bath.validate()?;
    let rho0 = FockDensity::thermal(dim, bath.n_eq)?;
    let x0 = rho0
        .matrix()
        .scale(0.5 * Complex64::from_polar(1.0, spec.phi));
    let mut base = Generator::new(dim, params, bath);
    base.kappa = bath.dephasing_rate();
    let pieces: Vec<Piece> = spec
        .schedule
        .segments
        .iter()
        .map(|s| {
            let mut gen = base.clone();
            gen.left = Some(Branch {
                f: f64::from(s.fe),
                delta: s.delta,
            });
            gen.right = Some(Branch {
                f: f64::from(s.fg),
                delta: s.delta,
            });
            Piece { dt: s.dt, gen }
        })
        .collect();
    let eg = integrate(&pieces, &x0, params, bath, opts)?;
    Ok(2.0 * eg.trace().re)
}
