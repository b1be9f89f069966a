//! Truncated Fock-space reference engine.
//!
//! Everything here works with explicit `dim x dim` matrices: displacement
//! operators from matrix exponentials, Kraus maps built from them, unitary
//! qubit-oscillator evolution and a Lindblad integrator. It shares no algebra
//! with the phase-space models, so agreement between the two is a real check.
//!
//! States are in the lab frame. `U0(t) = e^{-i omega t a^dag a}` is applied as
//! diagonal phases.

mod linalg;
mod lindblad;
mod sequence;

use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, SQRT_2};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::decoherence::{BathParams, GridSpec, WignerGrid};
use crate::error::{Error, Result};
use crate::phase_space::{CatComponent, ComplexAmp, OscillatorState};
use crate::pulses::{integrate_schedule, SystemParams};
use crate::ramsey::{CorrelationRequest, MeasurementSpec, ResolvedMeasurement};

pub use linalg::{CMatrix, Matrix, RMatrix, Scalar};
pub use lindblad::{
    lindblad_propagate, lindblad_propagate_with, window_expectation_oracle, LindbladOpts,
};
pub use sequence::{
    evolve_sequence, ramsey_readout, ramsey_steps, window_steps, JointState, Level, QubitStep,
};

/// Largest population allowed in the top tenth of the levels.
pub const TAIL_TOL: f64 = 1e-10;

/// Most measurements [`oracle_correlation`] accepts.
pub const MAX_ORACLE_ORDER: usize = 4;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;

/// First level of the tail block (the top 10% of levels, at least one).
pub fn tail_start(dim: usize) -> usize {
    dim - dim.div_ceil(10).max(1)
}

/// Levels needed before a thermal distribution of mean `nbar` drops below `1e-12`.
fn thermal_levels(nbar: f64) -> usize {
    if nbar <= 0.0 {
        return 0;
    }
    let q = nbar / (nbar + 1.0);
    ((1e-12f64).ln() / q.ln()).ceil() as usize + 10
}

/// Truncation that holds a state displaced by up to `reach` from a thermal
/// state of mean `nbar`.
///
/// `r = reach + sqrt(2 nbar)` and `dim = max(ceil(r^2 + 10 r + 20), thermal tail + 10)`.
pub fn adequate_dim(reach: f64, nbar: f64) -> usize {
    let r = reach.abs() + (2.0 * nbar.max(0.0)).sqrt();
    let base = (r * r + 10.0 * r + 20.0).ceil() as usize;
    base.max(thermal_levels(nbar)).max(2)
}

fn require_dim(dim: usize, required: usize) -> Result<()> {
    if dim < required {
        Err(Error::Truncation {
            required,
            actual: dim,
        })
    } else {
        Ok(())
    }
}

/// `e^{-i omega t n}` for `n < dim`.
fn free_phases(dim: usize, omega: f64, t: f64) -> Vec<Complex64> {
    (0..dim)
        .map(|n| Complex64::from_polar(1.0, -omega * t * n as f64))
        .collect()
}

/// `U rho U^dag` for diagonal `U`.
fn conjugate_diag(m: &CMatrix, u: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(m.dim(), |i, j| u[i] * m[(i, j)] * u[j].conj())
}

/// `a` with `a_{m, m+1} = sqrt(m + 1)`.
pub fn annihilation(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
}

impl FockOperator {
    pub fn new(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Largest entry of `U^dag U - 1` on the non-tail block.
    pub fn unitarity_error(&self) -> f64 {
        let g = self.matrix.adjoint().mul(&self.matrix);
        g.block_max_diff(&CMatrix::identity(self.dim()), tail_start(self.dim()))
    }
}

/// Displacement operators, reusing the real exponential of `r (a^dag - a)`
/// across phases. No truncation check is made.
#[derive(Debug, Default)]
pub struct DisplacementCache {
    entries: Vec<(u64, RMatrix)>,
}

impl DisplacementCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, dim: usize, alpha: ComplexAmp) -> CMatrix {
        let r = alpha.norm();
        // radii equal to 1e-13 share one exponential, so symmetric grids reuse it
        let key = (r * 1e13).round() as u64;
        let idx = match self
            .entries
            .iter()
            .position(|(k, m)| *k == key && m.dim() == dim)
        {
            Some(i) => i,
            None => {
                self.entries.push((key, real_displacement(dim, r)));
                self.entries.len() - 1
            }
        };
        let e = &self.entries[idx].1;
        let th = alpha.arg();
        CMatrix::from_fn(dim, |i, j| {
            Complex64::from_polar(e[(i, j)], th * (i as f64 - j as f64))
        })
    }
}

/// `exp(r (a^dag - a))`, real for real `r`.
fn real_displacement(dim: usize, r: f64) -> RMatrix {
    RMatrix::from_fn(dim, |i, j| {
        if i == j + 1 {
            r * (i as f64).sqrt()
        } else if j == i + 1 {
            -r * (j as f64).sqrt()
        } else {
            0.0
        }
    })
    .expm()
}

/// `D(alpha) = exp(alpha a^dag - alpha^* a)`. The phase is applied as
/// `e^{i theta (m - n)}` on the exponential for `|alpha|`, which is exact in
/// the truncated space too.
pub fn build_displacement(dim: usize, alpha: ComplexAmp) -> Result<FockOperator> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::arg("displacement amplitude must be finite"));
    }
    require_dim(dim, adequate_dim(alpha.norm(), 0.0))?;
    Ok(FockOperator::new(
        DisplacementCache::default().get(dim, alpha),
    ))
}

/// Truncated oscillator density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    matrix: CMatrix,
}

impl FockDensity {
    /// Checks Hermiticity, unit trace and an empty tail. Positivity is not checked.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() < 2 {
            return Err(Error::arg("Fock dimension must be at least 2"));
        }
        let rho = Self { matrix };
        if rho.hermiticity_error() > HERMITIAN_TOL {
            return Err(Error::arg("density matrix is not Hermitian"));
        }
        if (rho.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::arg("density matrix trace differs from 1"));
        }
        rho.check_tail()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|psi><psi|` for a normalized amplitude vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let n = psi.len();
        Self::from_matrix(CMatrix::from_fn(n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn ground(dim: usize) -> Result<Self> {
        let mut psi = alloc::vec![Complex64::new(0.0, 0.0); dim.max(2)];
        psi[0] = Complex64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    /// Geometric distribution of mean `nbar`, renormalized after truncation.
    pub fn thermal(dim: usize, nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::arg("thermal occupation must be finite and >= 0"));
        }
        require_dim(dim, adequate_dim(0.0, nbar))?;
        let q = nbar / (nbar + 1.0);
        let mut p: Vec<f64> = (0..dim).map(|n| q.powi(n as i32)).collect();
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= z);
        let d: Vec<Complex64> = p.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        Self::from_matrix(CMatrix::from_diag(&d))
    }

    pub fn coherent(dim: usize, amp: ComplexAmp) -> Result<Self> {
        require_dim(dim, adequate_dim(amp.norm(), 0.0))?;
        Self::pure(&coherent_amplitudes(dim, amp))
    }

    /// Any analytic state. Cat states are renormalized after truncation.
    pub fn from_state(state: &OscillatorState, dim: usize) -> Result<Self> {
        state.validate()?;
        match state {
            OscillatorState::Ground => Self::ground(dim),
            OscillatorState::Coherent { amp } => Self::coherent(dim, *amp),
            OscillatorState::Thermal { nbar } => Self::thermal(dim, *nbar),
            OscillatorState::Cat { components } => {
                require_dim(dim, adequate_dim(state_reach(state), 0.0))?;
                let mut psi = alloc::vec![Complex64::new(0.0, 0.0); dim];
                for CatComponent { weight, amp } in components {
                    for (p, c) in psi.iter_mut().zip(coherent_amplitudes(dim, *amp)) {
                        *p += weight * c;
                    }
                }
                let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                psi.iter_mut().for_each(|z| *z /= norm);
                Self::pure(&psi)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(rho A)`.
    pub fn expect(&self, op: &CMatrix) -> Complex64 {
        self.matrix.mul(op).trace()
    }

    pub fn mean_a(&self) -> Complex64 {
        (1..self.dim())
            .map(|n| self.matrix[(n, n - 1)] * (n as f64).sqrt())
            .sum()
    }

    pub fn mean_n(&self) -> f64 {
        (0..self.dim())
            .map(|n| n as f64 * self.matrix[(n, n)].re)
            .sum()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn tail_population(&self) -> f64 {
        (tail_start(self.dim())..self.dim())
            .map(|n| self.matrix[(n, n)].re.abs())
            .sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut e = 0.0f64;
        for i in 0..n {
            for j in i..n {
                e = e.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        e
    }

    fn check_tail(&self) -> Result<()> {
        if self.tail_population() > TAIL_TOL {
            let reach = (2.0 * self.mean_n()).sqrt();
            return Err(Error::Truncation {
                required: adequate_dim(reach, 0.0).max(self.dim() + 1),
                actual: self.dim(),
            });
        }
        Ok(())
    }
}

/// `<n|beta>` for `n < dim`.
fn coherent_amplitudes(dim: usize, beta: ComplexAmp) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(dim);
    let mut x = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            x = x * beta / (n as f64).sqrt();
        }
        c.push(x);
    }
    c
}

/// Largest coherent amplitude present in an analytic state.
fn state_reach(state: &OscillatorState) -> f64 {
    match state {
        OscillatorState::Coherent { amp } => amp.norm(),
        OscillatorState::Cat { components } => {
            components.iter().map(|c| c.amp.norm()).fold(0.0, f64::max)
        }
        _ => 0.0,
    }
}

fn state_nbar(state: &OscillatorState) -> f64 {
    match state {
        OscillatorState::Thermal { nbar } => *nbar,
        _ => 0.0,
    }
}

/// Lab-frame Kraus operators of one measurement:
/// `E_pm = [e^{i phi_g} D(alpha_g) +- e^{i(phi_e + phi)} D(alpha_e)] U0(tau) / 2`.
#[derive(Debug, Clone)]
pub struct KrausPair {
    pub plus: FockOperator,
    pub minus: FockOperator,
}

impl KrausPair {
    /// Largest entry of `E+^dag E+ + E-^dag E- - 1` on the non-tail block.
    pub fn completeness_error(&self) -> f64 {
        let p = self.plus.matrix();
        let m = self.minus.matrix();
        let s = p.adjoint().mul(p).add(&m.adjoint().mul(m));
        s.block_max_diff(&CMatrix::identity(s.dim()), tail_start(s.dim()))
    }
}

/// Branch operators `e^{i phi_x} D(alpha_x)` of one window, before `U0(tau)`.
struct WindowOps {
    excited: CMatrix,
    ground: CMatrix,
}

fn window_ops(
    dim: usize,
    spec: &MeasurementSpec,
    params: &SystemParams,
    cache: &mut DisplacementCache,
) -> Result<(WindowOps, f64)> {
    spec.validate()?;
    let r = integrate_schedule(params, &spec.schedule)?;
    let reach = r.alpha_e.norm().max(r.alpha_g.norm());
    let e = cache
        .get(dim, r.alpha_e)
        .scale(Complex64::from_polar(1.0, spec.phi + r.phi_e));
    let g = cache
        .get(dim, r.alpha_g)
        .scale(Complex64::from_polar(1.0, r.phi_g));
    Ok((
        WindowOps {
            excited: e,
            ground: g,
        },
        reach,
    ))
}

pub fn kraus_operators(
    dim: usize,
    spec: &MeasurementSpec,
    params: &SystemParams,
) -> Result<KrausPair> {
    let (ops, reach) = window_ops(dim, spec, params, &mut DisplacementCache::default())?;
    require_dim(dim, adequate_dim(reach, 0.0))?;
    let u0 = CMatrix::from_diag(&free_phases(dim, params.omega, spec.tau));
    let half = Complex64::new(0.5, 0.0);
    Ok(KrausPair {
        plus: FockOperator::new(ops.ground.add(&ops.excited).mul(&u0).scale(half)),
        minus: FockOperator::new(ops.ground.sub(&ops.excited).mul(&u0).scale(half)),
    })
}

/// Outcome probabilities and normalized conditioned states. A state is
/// `None` when its probability is below `1e-14`.
#[derive(Debug, Clone)]
pub struct KrausOutcome {
    pub p_plus: f64,
    pub p_minus: f64,
    pub rho_plus: Option<FockDensity>,
    pub rho_minus: Option<FockDensity>,
}

impl KrausOutcome {
    pub(crate) fn from_unnormalized(plus: CMatrix, minus: CMatrix) -> Self {
        let p_plus = plus.trace().re;
        let p_minus = minus.trace().re;
        let norm = |m: CMatrix, p: f64| {
            (p >= crate::ramsey::MIN_BRANCH_PROBABILITY)
                .then(|| FockDensity::from_matrix_unchecked(m.scale(Complex64::new(1.0 / p, 0.0))))
        };
        Self {
            p_plus,
            p_minus,
            rho_plus: norm(plus, p_plus),
            rho_minus: norm(minus, p_minus),
        }
    }
}

/// [`kraus_measure`] for a measurement given by its co-rotating amplitudes;
/// `rho` and the result are in the frame co-rotating at `omega`.
pub fn kraus_measure_resolved(rho: &FockDensity, m: &ResolvedMeasurement) -> Result<KrausOutcome> {
    let dim = rho.dim();
    rho.check_tail()?;
    let reach = m.alpha_e.norm().max(m.alpha_g.norm()) + (2.0 * rho.mean_n()).sqrt();
    require_dim(dim, adequate_dim(reach, 0.0))?;
    let mut cache = DisplacementCache::new();
    let x = cache
        .get(dim, m.alpha_e)
        .scale(Complex64::from_polar(1.0, m.phase));
    let g = cache.get(dim, m.alpha_g);
    let half = Complex64::new(0.5, 0.0);
    let plus = g.add(&x).scale(half);
    let minus = g.sub(&x).scale(half);
    let apply = |e: &CMatrix| e.mul(rho.matrix()).mul_adjoint(e);
    Ok(KrausOutcome::from_unnormalized(apply(&plus), apply(&minus)))
}

pub fn kraus_measure(
    rho: &FockDensity,
    spec: &MeasurementSpec,
    params: &SystemParams,
) -> Result<KrausOutcome> {
    let dim = rho.dim();
    rho.check_tail()?;
    let r = integrate_schedule(params, &spec.schedule)?;
    let reach = r.alpha_e.norm().max(r.alpha_g.norm()) + (2.0 * rho.mean_n()).sqrt();
    require_dim(dim, adequate_dim(reach, 0.0))?;
    let k = kraus_operators(dim, spec, params)?;
    let apply = |e: &CMatrix| e.mul(rho.matrix()).mul_adjoint(e);
    Ok(KrausOutcome::from_unnormalized(
        apply(k.plus.matrix()),
        apply(k.minus.matrix()),
    ))
}

/// Largest `|sum of chosen branch amplitudes|` over all prefixes, where each
/// measurement contributes either its excited or its ground amplitude.
fn prefix_reach(amps: &[(ComplexAmp, ComplexAmp)]) -> f64 {
    fn go(amps: &[(ComplexAmp, ComplexAmp)], acc: ComplexAmp, best: &mut f64) {
        *best = best.max(acc.norm());
        if let Some((&(e, g), rest)) = amps.split_first() {
            go(rest, acc + e, best);
            if g != e {
                go(rest, acc + g, best);
            }
        }
    }
    let mut best = 0.0;
    go(amps, Complex64::new(0.0, 0.0), &mut best);
    best
}

/// Dimension [`oracle_correlation`] picks for a request.
pub fn oracle_dim(
    request: &CorrelationRequest,
    params: &SystemParams,
    bath: Option<&BathParams>,
) -> Result<usize> {
    let amps: Vec<_> = request
        .resolve(params)?
        .iter()
        .map(|m| (m.alpha_e, m.alpha_g))
        .collect();
    let mut nbar = state_nbar(&request.initial);
    if let Some(b) = bath {
        if b.gamma > 0.0 {
            nbar = nbar.max(b.n_eq);
        }
    }
    Ok(adequate_dim(
        prefix_reach(&amps) + state_reach(&request.initial),
        nbar,
    ))
}

/// Dimension [`oracle_correlation_resolved`] picks.
pub fn resolved_dim(ms: &[ResolvedMeasurement], initial: &OscillatorState) -> usize {
    let amps: Vec<_> = ms.iter().map(|m| (m.alpha_e, m.alpha_g)).collect();
    adequate_dim(
        prefix_reach(&amps) + state_reach(initial),
        state_nbar(initial),
    )
}

/// `Tr{Q_n ... Q_1 rho_0}` for measurements given by co-rotating amplitudes,
/// `Q rho = [e^{i phase} D(alpha_e) rho D(alpha_g)^dag + h.c.] / 2`. Uses
/// [`resolved_dim`] when `dim` is `None`.
pub fn oracle_correlation_resolved(
    ms: &[ResolvedMeasurement],
    initial: &OscillatorState,
    dim: Option<usize>,
) -> Result<f64> {
    if ms.len() > MAX_ORACLE_ORDER {
        return Err(Error::Capacity {
            requested: ms.len(),
            limit: MAX_ORACLE_ORDER,
        });
    }
    let required = resolved_dim(ms, initial);
    let dim = dim.unwrap_or(required);
    require_dim(dim, required)?;
    let mut cache = DisplacementCache::new();
    let mut rho = FockDensity::from_state(initial, dim)?.into_matrix();
    for m in ms {
        let x = cache
            .get(dim, m.alpha_e)
            .scale(Complex64::from_polar(1.0, m.phase));
        let g = cache.get(dim, m.alpha_g);
        let a = x.mul(&rho).mul_adjoint(&g);
        rho = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
    }
    Ok(rho.trace().re)
}

/// `Tr{Q_n ... Q_1 rho_0}` with explicit matrices at an automatically chosen dimension.
pub fn oracle_correlation(
    request: &CorrelationRequest,
    params: &SystemParams,
    bath: Option<&BathParams>,
) -> Result<f64> {
    let dim = oracle_dim(request, params, bath)?;
    oracle_correlation_with_dim(request, params, bath, dim)
}

/// [`oracle_correlation`] at a fixed dimension, used for convergence checks.
///
/// Between windows the state rotates freely, or follows the Lindblad
/// equation when a bath is given.
pub fn oracle_correlation_with_dim(
    request: &CorrelationRequest,
    params: &SystemParams,
    bath: Option<&BathParams>,
    dim: usize,
) -> Result<f64> {
    request.validate()?;
    params.validate()?;
    if request.specs.len() > MAX_ORACLE_ORDER {
        return Err(Error::Capacity {
            requested: request.specs.len(),
            limit: MAX_ORACLE_ORDER,
        });
    }
    if let Some(b) = bath {
        b.validate()?;
    }
    require_dim(dim, oracle_dim(request, params, bath)?)?;

    let mut cache = DisplacementCache::default();
    let mut rho = FockDensity::from_state(&request.initial, dim)?.into_matrix();
    let mut t = 0.0;
    for spec in &request.specs {
        let gap = spec.t_start() - t;
        if gap > 0.0 {
            rho = match bath {
                Some(b) if b.gamma > 0.0 => {
                    lindblad::propagate_operator(&rho, gap, params, b, &LindbladOpts::default())?
                }
                _ => conjugate_diag(&rho, &free_phases(dim, params.omega, gap)),
            };
        }
        let (ops, _) = window_ops(dim, spec, params, &mut cache)?;
        let m = conjugate_diag(&rho, &free_phases(dim, params.omega, spec.tau));
        let a = ops.excited.mul(&m).mul_adjoint(&ops.ground);
        let half = Complex64::new(0.5, 0.0);
        rho = a.add(&a.adjoint()).scale(half);
        t = spec.t_end;
    }
    Ok(rho.trace().re)
}

/// `W(xi) = (2/pi) Tr[rho D(xi) P D(xi)^dag]` with parity `P = (-1)^n`.
pub fn displaced_parity(rho: &FockDensity, xi: ComplexAmp) -> f64 {
    displaced_parity_cached(rho, xi, &mut DisplacementCache::default())
}

/// [`displaced_parity`] reusing exponentials from `cache`.
pub fn displaced_parity_cached(
    rho: &FockDensity,
    xi: ComplexAmp,
    cache: &mut DisplacementCache,
) -> f64 {
    let dim = rho.dim();
    let d = cache.get(dim, xi);
    let b = rho.matrix().mul(&d);
    let mut s = 0.0;
    for n in 0..dim {
        let mut v = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            v += d[(j, n)].conj() * b[(j, n)];
        }
        s += if n % 2 == 0 { v.re } else { -v.re };
    }
    FRAC_2_PI * s
}

/// Displaced-parity Wigner function on a grid.
#[derive(Debug, Clone)]
pub struct OracleWigner {
    pub grid: WignerGrid,
    /// Some grid point lies beyond the region the truncation resolves.
    pub outside_support: bool,
}

/// Whether `W(xi)` is resolved by the truncation of `rho`.
pub fn wigner_supported(rho: &FockDensity, xi: ComplexAmp) -> bool {
    adequate_dim(xi.norm() + (2.0 * rho.mean_n()).sqrt(), 0.0) <= rho.dim()
}

pub fn wigner_displaced_parity(rho: &FockDensity, grid: &GridSpec) -> Result<OracleWigner> {
    grid.validate()?;
    let mut cache = DisplacementCache::default();
    let mut values = Vec::with_capacity(grid.len());
    let mut outside = false;
    for j in 0..grid.np {
        for i in 0..grid.nx {
            let xi = grid.point(i, j);
            outside |= !wigner_supported(rho, xi);
            values.push(displaced_parity_cached(rho, xi, &mut cache));
        }
    }
    Ok(OracleWigner {
        grid: WignerGrid {
            spec: *grid,
            values,
        },
        outside_support: outside,
    })
}

/// Position quadrature `x = (a + a^dag) / sqrt(2)`.
pub fn position(dim: usize) -> CMatrix {
    let a = annihilation(dim);
    a.add(&a.adjoint()).scale(Complex64::new(1.0 / SQRT_2, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::PulseSchedule;
    use crate::ramsey::{correlation, single_expectation, three_point_commuting};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn displacement_examples() {
        let id = build_displacement(20, c(0.0, 0.0)).unwrap();
        assert!(id.matrix().sub(&CMatrix::identity(20)).frobenius() < 1e-15);

        let a = c(0.6, -0.8);
        let d = build_displacement(32, a).unwrap();
        assert_abs_diff_eq!(d.matrix()[(0, 0)].re, (-0.5f64).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(d.matrix()[(0, 0)].im, 0.0, epsilon = 1e-10);

        let inv = build_displacement(32, -a).unwrap();
        let prod = d.matrix().mul(inv.matrix());
        assert!(prod.block_max_diff(&CMatrix::identity(32), tail_start(32)) < 1e-8);
        assert!(d.unitarity_error() < 1e-8);
    }

    #[test]
    fn displacement_acts_on_vacuum_as_coherent_state() {
        let b = c(-1.1, 0.7);
        let d = build_displacement(48, b).unwrap();
        let want = coherent_amplitudes(48, b);
        for (n, w) in want.iter().enumerate().take(20) {
            assert!((d.matrix()[(n, 0)] - w).norm() < 1e-12);
        }
    }

    #[test]
    fn composition_matches_phase_space_rule() {
        let (a1, a2) = (c(0.7, 0.2), c(-0.3, 0.9));
        let dim = 64;
        let p = crate::phase_space::compose_displacements(&[a1, a2]).unwrap();
        let lhs = build_displacement(dim, a2)
            .unwrap()
            .matrix()
            .mul(build_displacement(dim, a1).unwrap().matrix());
        let rhs = build_displacement(dim, p.total_amp)
            .unwrap()
            .matrix()
            .scale(Complex64::from_polar(1.0, p.accumulated_phase));
        assert!(lhs.block_max_diff(&rhs, tail_start(dim) - 20) < 1e-8);
    }

    #[test]
    fn truncation_is_reported() {
        match build_displacement(20, c(2.0, 0.0)) {
            Err(Error::Truncation { required, actual }) => {
                assert_eq!(actual, 20);
                assert_eq!(required, adequate_dim(2.0, 0.0));
            }
            other => panic!("{other:?}"),
        }
        assert!(FockDensity::thermal(10, 3.0).is_err());
    }

    #[test]
    fn kraus_trivial_and_thermal() {
        let free = SystemParams::new(1.0, 0.0).unwrap();
        let spec = MeasurementSpec::static_window(0.0, 1.3, 1.3).unwrap();
        let rho = FockDensity::thermal(40, 0.5).unwrap();
        let out = kraus_measure(&rho, &spec, &free).unwrap();
        assert_abs_diff_eq!(out.p_plus, 1.0, epsilon = 1e-13);
        assert!(out.rho_minus.is_none());
        // free rotation leaves a thermal state unchanged
        assert!(out.rho_plus.unwrap().matrix().sub(rho.matrix()).frobenius() < 1e-13);

        // tau = pi, lambda = 1/2 gives |alpha| = 1; phi = -phi_tot makes phibar = 0
        let p = SystemParams::new(1.0, 0.5).unwrap();
        let rec = integrate_schedule(&p, &PulseSchedule::static_window(PI).unwrap()).unwrap();
        let spec = MeasurementSpec::static_window(-rec.phi_tot, PI, PI).unwrap();
        let out = kraus_measure(&FockDensity::thermal(64, 1.0).unwrap(), &spec, &p).unwrap();
        assert_abs_diff_eq!(out.p_plus, 0.5 * (1.0 + (-1.5f64).exp()), epsilon = 1e-10);
        assert_abs_diff_eq!(out.p_plus + out.p_minus, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kraus_completeness() {
        let p = SystemParams::new(1.0, 0.8).unwrap();
        let spec = MeasurementSpec::static_window(0.4, 2.1, 5.0).unwrap();
        let k = kraus_operators(70, &spec, &p).unwrap();
        assert!(k.completeness_error() < 1e-10);
    }

    #[test]
    fn oracle_matches_analytic_examples() {
        let p = SystemParams::new(1.0, 0.5).unwrap();
        let single = CorrelationRequest {
            specs: alloc::vec![MeasurementSpec::static_window(0.3, 2.0, 2.0).unwrap()],
            initial: OscillatorState::thermal(0.7).unwrap(),
        };
        let want = single_expectation(&single.initial, &single.specs[0], &p).unwrap();
        assert_abs_diff_eq!(
            oracle_correlation(&single, &p, None).unwrap(),
            want,
            epsilon = 1e-8
        );

        let two = CorrelationRequest {
            specs: alloc::vec![
                MeasurementSpec::static_window(0.2, PI, PI).unwrap(),
                MeasurementSpec::static_window(-0.5, PI, 2.0 * PI + FRAC_PI_2).unwrap(),
            ],
            initial: OscillatorState::thermal(1.0).unwrap(),
        };
        let want = correlation(&two, &p).unwrap();
        assert_abs_diff_eq!(
            oracle_correlation(&two, &p, None).unwrap(),
            want,
            epsilon = 1e-6
        );
    }

    #[test]
    fn oracle_matches_three_point_commuting() {
        // windows spaced by whole periods keep all displacements collinear
        let p = SystemParams::new(1.0, 0.25).unwrap();
        let specs = [
            MeasurementSpec::static_window(0.1, PI, PI).unwrap(),
            MeasurementSpec::static_window(0.7, PI, 3.0 * PI).unwrap(),
            MeasurementSpec::static_window(-0.4, PI, 5.0 * PI).unwrap(),
        ];
        let initial = OscillatorState::Ground;
        let want = three_point_commuting(&specs, &initial, &p).unwrap();
        let req = CorrelationRequest {
            specs: specs.to_vec(),
            initial,
        };
        assert_abs_diff_eq!(
            oracle_correlation(&req, &p, None).unwrap(),
            want,
            epsilon = 1e-6
        );
    }

    #[test]
    fn oracle_converges_in_dim() {
        let p = SystemParams::new(1.0, 0.6).unwrap();
        let req = CorrelationRequest {
            specs: alloc::vec![
                MeasurementSpec::static_window(0.0, 2.0, 2.0).unwrap(),
                MeasurementSpec::static_window(1.0, 2.5, 6.0).unwrap(),
            ],
            initial: OscillatorState::coherent(c(0.5, -0.3)),
        };
        let dim = oracle_dim(&req, &p, None).unwrap();
        let a = oracle_correlation_with_dim(&req, &p, None, dim).unwrap();
        let b = oracle_correlation_with_dim(&req, &p, None, 2 * dim).unwrap();
        assert!((a - b).abs() < 1e-6);
        assert!(matches!(
            oracle_correlation_with_dim(&req, &p, None, dim - 1),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn resolved_oracle_matches_expansion() {
        let ms = [
            ResolvedMeasurement {
                alpha_e: c(0.4, 0.3),
                alpha_g: c(-0.2, 0.1),
                phase: 0.7,
            },
            ResolvedMeasurement::from_relative(c(-0.5, 0.6), -1.1),
        ];
        let state = OscillatorState::thermal(0.3).unwrap();
        let want = crate::ramsey::correlation_resolved(&ms, &state).unwrap();
        assert_abs_diff_eq!(
            oracle_correlation_resolved(&ms, &state, None).unwrap(),
            want,
            epsilon = 1e-10
        );

        let rho = FockDensity::ground(40).unwrap();
        let k = kraus_measure_resolved(&rho, &ms[1]).unwrap();
        let (plus, _) =
            crate::ramsey::measure_conditioned_resolved(&OscillatorState::Ground, &ms[1]).unwrap();
        assert_abs_diff_eq!(k.p_plus, plus.probability, epsilon = 1e-10);
    }

    #[test]
    fn vacuum_wigner() {
        let rho = FockDensity::ground(24).unwrap();
        assert_abs_diff_eq!(
            displaced_parity(&rho, c(0.0, 0.0)),
            FRAC_2_PI,
            epsilon = 1e-12
        );
        let xi = c(0.3, -0.4);
        assert_abs_diff_eq!(
            displaced_parity(&rho, xi),
            FRAC_2_PI * (-2.0 * xi.norm_sqr()).exp(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn thermal_wigner_normalized() {
        let rho = FockDensity::thermal(115, 0.5).unwrap();
        let grid = GridSpec::centered(c(0.0, 0.0), 3.5, 21);
        let w = wigner_displaced_parity(&rho, &grid).unwrap();
        assert!(!w.outside_support);
        assert_abs_diff_eq!(w.grid.integral(), 1.0, epsilon = 1e-3);
        // isotropic
        assert_abs_diff_eq!(w.grid.get(15, 8), w.grid.get(8, 15), epsilon = 1e-10);
    }
}
