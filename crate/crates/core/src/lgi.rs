//! Leggett–Garg witness `W = C12 + C23 - C13` for three equally spaced
//! measurements with real displacement `alpha` and rotation angle `theta`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, SimplexOpts};

/// One optimized cell of an `(alpha, theta)` map.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LgiPoint {
    pub alpha: f64,
    pub theta: f64,
    pub nbar: f64,
    pub w_max: f64,
    pub argmax_phases: [f64; 3],
}

/// Coarse grid plus simplex refinement settings for [`maximize_w`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerOpts {
    /// Grid points per phase axis; at least 8.
    pub grid: usize,
    /// Number of best grid cells refined by the simplex search.
    pub starts: usize,
    /// Convergence tolerance on `W`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerOpts {
    fn default() -> Self {
        Self {
            grid: 24,
            starts: 5,
            tol: 1e-9,
            max_iter: 2000,
        }
    }
}

impl OptimizerOpts {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 {
            return Err(Error::arg(
                "optimizer grid needs at least 8 points per axis",
            ));
        }
        if self.starts == 0 {
            return Err(Error::arg("optimizer needs at least one start"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::arg("optimizer tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct PairTerms {
    gamma: f64,
    plus: f64,
    minus: f64,
}

impl PairTerms {
    fn new(alpha: f64, angle: f64, nbar: f64, include_gamma: bool) -> Self {
        let s = alpha * alpha * (2.0 * nbar + 1.0);
        Self {
            gamma: if include_gamma {
                alpha * alpha * angle.sin()
            } else {
                0.0
            },
            plus: (-s * (1.0 + angle.cos())).exp(),
            minus: (-s * (1.0 - angle.cos())).exp(),
        }
    }

    fn eval(&self, a: f64, b: f64) -> f64 {
        0.5 * ((a + b + self.gamma).cos() * self.plus + (a - b - self.gamma).cos() * self.minus)
    }
}

/// The three thermal two-time correlators of the witness, precomputed for a
/// fixed `(alpha, theta, nbar)` so that only the phases vary.
#[derive(Debug, Clone, Copy)]
pub struct WitnessTerms {
    near: PairTerms,
    far: PairTerms,
}

impl WitnessTerms {
    /// With `include_gamma = false` the interference phase is dropped, which
    /// turns the quantum correlators into their classical counterparts.
    pub fn new(alpha: f64, theta: f64, nbar: f64, include_gamma: bool) -> Self {
        Self {
            near: PairTerms::new(alpha, theta, nbar, include_gamma),
            far: PairTerms::new(alpha, 2.0 * theta, nbar, include_gamma),
        }
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.near.eval(p[0], p[1]) + self.near.eval(p[1], p[2]) - self.far.eval(p[0], p[2])
    }
}

/// `W` at explicit phases `(phibar_1, phibar_2, phibar_3)`.
pub fn lgi_w(alpha: f64, theta: f64, nbar: f64, phases: [f64; 3]) -> f64 {
    WitnessTerms::new(alpha, theta, nbar, true).eval(phases)
}

fn wrap(p: [f64; 3]) -> [f64; 3] {
    p.map(|x| {
        let y = x - TAU * (x / TAU).floor();
        if (0.0..TAU).contains(&y) {
            y
        } else {
            0.0
        }
    })
}

fn better(a: (f64, [f64; 3]), b: (f64, [f64; 3])) -> bool {
    const TIE: f64 = 1e-12;
    if (a.0 - b.0).abs() > TIE {
        return a.0 > b.0;
    }
    a.1 < b.1
}

/// Maximizes an arbitrary phase function over the torus `[0, 2 pi)^3`.
pub fn maximize_phases(
    w: impl Fn([f64; 3]) -> f64,
    opts: &OptimizerOpts,
) -> Result<(f64, [f64; 3])> {
    opts.validate()?;
    let n = opts.grid;
    let h = TAU / n as f64;
    let mut best: Vec<(f64, [f64; 3])> = Vec::with_capacity(opts.starts + 1);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = [i as f64 * h, j as f64 * h, k as f64 * h];
                let v = w(p);
                if best.len() < opts.starts || better((v, p), best[best.len() - 1]) {
                    let pos = best
                        .iter()
                        .position(|&b| better((v, p), b))
                        .unwrap_or(best.len());
                    best.insert(pos, (v, p));
                    best.truncate(opts.starts);
                }
            }
        }
    }

    let neg = |x: &[f64; 3]| -w(*x);
    let mut out = best[0];
    for &(v0, p0) in &best {
        let mut cur = (v0, p0);
        let mut step = 0.5 * h;
        // a restart with a fresh, smaller simplex guards against premature collapse
        for _ in 0..3 {
            let r = nelder_mead(
                neg,
                cur.1,
                SimplexOpts {
                    step,
                    f_tol: opts.tol * 1e-3,
                    max_iter: opts.max_iter,
                },
            );
            if -r.f >= cur.0 {
                cur = (-r.f, r.x);
            }
            step *= 0.1;
        }
        let cand = (cur.0, wrap(cur.1));
        if better(cand, out) {
            out = cand;
        }
    }
    Ok(out)
}

/// Largest `W` over all phases at fixed `(alpha, theta, nbar)`.
pub fn maximize_w(alpha: f64, theta: f64, nbar: f64, opts: &OptimizerOpts) -> Result<LgiPoint> {
    check_inputs(alpha, theta, nbar)?;
    let terms = WitnessTerms::new(alpha, theta, nbar, true);
    let (w_max, argmax_phases) = maximize_phases(|p| terms.eval(p), opts)?;
    Ok(LgiPoint {
        alpha,
        theta,
        nbar,
        w_max,
        argmax_phases,
    })
}

fn check_inputs(alpha: f64, theta: f64, nbar: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::arg("alpha must be finite and >= 0"));
    }
    if !theta.is_finite() {
        return Err(Error::arg("theta must be finite"));
    }
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::arg("nbar must be finite and >= 0"));
    }
    Ok(())
}

/// Serial map over `alphas x thetas`, alpha varying slowest.
pub fn sweep(
    alphas: &[f64],
    thetas: &[f64],
    nbar: f64,
    opts: &OptimizerOpts,
) -> Result<Vec<LgiPoint>> {
    if alphas.is_empty() || thetas.is_empty() {
        return Err(Error::arg("sweep grids must be non-empty"));
    }
    let mut out = Vec::with_capacity(alphas.len() * thetas.len());
    for &a in alphas {
        for &t in thetas {
            out.push(maximize_w(a, t, nbar, opts)?);
        }
    }
    Ok(out)
}

/// Largest thermal occupation that still violates `W <= 1` at small `alpha`,
/// found by bisection on the sign of `w_max - 1`. Returns 0 when even the
/// ground state shows no violation.
pub fn nbar_threshold(theta: f64, alpha_small: f64, opts: &OptimizerOpts) -> Result<f64> {
    if !(alpha_small > 0.0 && alpha_small <= 0.1) {
        return Err(Error::Domain(
            "threshold needs 0 < alpha_small <= 0.1".into(),
        ));
    }
    check_inputs(alpha_small, theta, 0.0)?;
    let violates =
        |nbar: f64| -> Result<bool> { Ok(maximize_w(alpha_small, theta, nbar, opts)?.w_max > 1.0) };
    if !violates(0.0)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while violates(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Domain(
                "no upper bracket for the violation threshold".into(),
            ));
        }
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Second-order coefficient of `W - 1` at small `alpha`, maximized over the
/// phase branches: `|sin theta - sin 2 theta| - 1 - 2 nbar`.
pub fn small_alpha_excess(theta: f64, nbar: f64) -> f64 {
    (theta.sin() - (2.0 * theta).sin()).abs() - 1.0 - 2.0 * nbar
}

/// `1 + alpha^2 (sin theta - sin 2 theta - 1 - 2 nbar)`, the expansion of `W`
/// at phases `(pi, pi, pi/2)`.
pub fn small_alpha_law(alpha: f64, theta: f64, nbar: f64) -> f64 {
    1.0 + alpha * alpha * (theta.sin() - (2.0 * theta).sin() - 1.0 - 2.0 * nbar)
}

/// `3/2 (1 - pi^2 (2 nbar + 1) / (4 alpha^2))`, the large-alpha maximum near `theta = pi`.
pub fn large_alpha_law(alpha: f64, nbar: f64) -> f64 {
    1.5 * (1.0 - PI * PI * (2.0 * nbar + 1.0) / (4.0 * alpha * alpha))
}

/// Angle `pi - pi / (2 alpha^2)` at which the large-alpha law is evaluated.
pub fn large_alpha_theta(alpha: f64) -> f64 {
    PI - PI / (2.0 * alpha * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_alpha_is_classical_trig() {
        let p = [0.3, 1.7, -2.2];
        let w = lgi_w(0.0, 1.1, 0.4, p);
        let c = |x: f64| x.cos();
        assert_abs_diff_eq!(
            w,
            c(p[0]) * c(p[1]) + c(p[1]) * c(p[2]) - c(p[0]) * c(p[2]),
            epsilon = 1e-15
        );
        let pt = maximize_w(0.0, 1.1, 0.0, &OptimizerOpts::default()).unwrap();
        assert_abs_diff_eq!(pt.w_max, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn small_alpha_expansion_at_reference_phases() {
        let th = 3.0 * PI / 4.0;
        for nbar in [0.0, 0.2] {
            let a = 0.01;
            let w = lgi_w(a, th, nbar, [PI, PI, PI / 2.0]);
            assert_abs_diff_eq!(
                (w - 1.0) / (a * a),
                core::f64::consts::FRAC_1_SQRT_2 - 2.0 * nbar,
                epsilon = 2e-3
            );
            assert_abs_diff_eq!(
                small_alpha_law(a, th, nbar),
                1.0 + a * a * (core::f64::consts::FRAC_1_SQRT_2 - 2.0 * nbar),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn large_alpha_point() {
        let a = 5.0;
        let th = large_alpha_theta(a);
        assert_abs_diff_eq!(
            large_alpha_law(a, 0.0),
            1.5 * (1.0 - PI * PI / 100.0),
            epsilon = 1e-15
        );
        let pt = maximize_w(a, th, 0.0, &OptimizerOpts::default()).unwrap();
        assert!(pt.w_max >= 1.35 && pt.w_max <= 1.5 + 1e-9, "{pt:?}");
        // the explicit phase choice sits close to the optimum
        let w = lgi_w(a, th, 0.0, [-PI / 4.0, -PI / 4.0, -PI / 4.0]);
        assert!(
            (w - large_alpha_law(a, 0.0)).abs() / large_alpha_law(a, 0.0) < 0.02,
            "{w}"
        );
    }

    #[test]
    fn violation_at_moderate_alpha() {
        let pt = maximize_w(0.5, 3.0 * PI / 4.0, 0.0, &OptimizerOpts::default()).unwrap();
        assert!(pt.w_max > 1.0);
        assert!(pt.argmax_phases.iter().all(|&p| (0.0..TAU).contains(&p)));
    }

    #[test]
    fn threshold_guards_and_value() {
        let o = OptimizerOpts::default();
        assert!(matches!(
            nbar_threshold(1.0, 0.0, &o),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            nbar_threshold(1.0, 0.2, &o),
            Err(Error::Domain(_))
        ));
        // |sin t - sin 2t| <= 1 here, so not even the ground state violates
        assert_eq!(nbar_threshold(0.3, 0.05, &o).unwrap(), 0.0);
        let t = nbar_threshold(3.0 * PI / 4.0, 0.05, &o).unwrap();
        assert!((t - 2f64.sqrt() / 4.0).abs() < 0.01, "{t}");
    }

    #[test]
    fn optimizer_rejects_coarse_grid() {
        let o = OptimizerOpts {
            grid: 7,
            ..OptimizerOpts::default()
        };
        assert!(maximize_w(1.0, 1.0, 0.0, &o).is_err());
    }

    #[test]
    fn sweep_is_row_major() {
        let o = OptimizerOpts {
            grid: 8,
            ..OptimizerOpts::default()
        };
        let pts = sweep(&[0.2, 0.4], &[1.0, 2.0, 3.0], 0.0, &o).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[1].alpha, pts[1].theta), (0.2, 2.0));
        assert_eq!(pts[3], maximize_w(0.4, 1.0, 0.0, &o).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn quantum_bound_holds(alpha in 0.0f64..4.0, theta in 0.0f64..TAU, nbar in 0.0f64..1.0) {
            let pt = maximize_w(alpha, theta, nbar, &OptimizerOpts { grid: 12, ..OptimizerOpts::default() }).unwrap();
            prop_assert!(pt.w_max <= 1.5 + 1e-9);
        }

        #[test]
        fn refinement_never_loses(alpha in 0.0f64..3.0, theta in 0.0f64..TAU) {
            let coarse = maximize_w(alpha, theta, 0.0, &OptimizerOpts { grid: 8, ..OptimizerOpts::default() }).unwrap();
            let fine = maximize_w(alpha, theta, 0.0, &OptimizerOpts { grid: 16, ..OptimizerOpts::default() }).unwrap();
            prop_assert!(fine.w_max >= coarse.w_max - 1e-9);
        }

        #[test]
        fn dropping_gamma_restores_the_bound(alpha in 0.0f64..5.0, theta in 0.0f64..TAU, nbar in 0.0f64..2.0,
                                             p in proptest::array::uniform3(0.0f64..TAU)) {
            prop_assert!(WitnessTerms::new(alpha, theta, nbar, false).eval(p) <= 1.0 + 1e-9);
        }
    }
}
