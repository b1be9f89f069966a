//! Classical baseline: the qubit is coupled to a thermal ensemble of
//! classical sinusoids `x_c(t) = A cos(omega t + delta)` with Rayleigh
//! distributed `A` and uniform `delta`. Correlations of this model obey the
//! Leggett–Garg bound.

use alloc::vec::Vec;
use core::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ramsey::MeasurementSpec;
use crate::stats::Moments;

/// Samples drawn from one RNG stream.
pub const SHARD_SIZE: u64 = 1 << 16;

/// Smallest sample count accepted by [`monte_carlo_correlation`].
pub const MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicalFieldParams {
    /// `<x_c^2>`, the time-averaged squared field.
    pub variance: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl ClassicalFieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(Error::arg("variance must be finite and >= 0"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::arg("omega must be finite and > 0"));
        }
        if !self.lambda.is_finite() {
            return Err(Error::arg("lambda must be finite"));
        }
        Ok(())
    }

    /// `|alpha(tau)|^2 = (2 lambda / omega)^2 sin^2(omega tau / 2)` of a static window.
    pub fn alpha_sq(&self, tau: f64) -> f64 {
        let a = 2.0 * self.lambda / self.omega * (0.5 * self.omega * tau).sin();
        a * a
    }
}

/// `<Z>` of one static window.
pub fn classical_single(phi1: f64, tau1: f64, p: &ClassicalFieldParams) -> f64 {
    phi1.cos() * (-p.alpha_sq(tau1) * p.variance).exp()
}

/// Two static windows of equal length separated by rotation angle `theta`.
pub fn classical_two_time(
    phi1: f64,
    phi2: f64,
    tau: f64,
    theta: f64,
    p: &ClassicalFieldParams,
) -> f64 {
    classical_two_time_amp(p.alpha_sq(tau).sqrt(), theta, p.variance, phi1, phi2)
}

/// Same as [`classical_two_time`] with the window amplitude `|alpha|` given directly.
pub fn classical_two_time_amp(
    alpha_mag: f64,
    theta: f64,
    variance: f64,
    phi1: f64,
    phi2: f64,
) -> f64 {
    let s = 2.0 * alpha_mag * alpha_mag * variance;
    0.5 * ((phi1 + phi2).cos() * (-s * (1.0 + theta.cos())).exp()
        + (phi1 - phi2).cos() * (-s * (1.0 - theta.cos())).exp())
}

/// Leggett–Garg witness built from [`classical_two_time_amp`].
pub fn classical_lgi_w(alpha_mag: f64, theta: f64, variance: f64, phases: [f64; 3]) -> f64 {
    let c = |t: f64, a: f64, b: f64| classical_two_time_amp(alpha_mag, t, variance, a, b);
    c(theta, phases[0], phases[1]) + c(theta, phases[1], phases[2])
        - c(2.0 * theta, phases[0], phases[2])
}

/// Phase picked up in one window by a trajectory of amplitude `amp` and phase `delta`:
/// `-sqrt(2) lambda int f_-(s) x_c(s) ds` over `[t_end - tau, t_end]`.
pub fn accumulated_phase(
    spec: &MeasurementSpec,
    p: &ClassicalFieldParams,
    amp: f64,
    delta: f64,
) -> f64 {
    let k = window_coefficient(spec, p);
    amp * (Complex64::from_polar(1.0, delta) * k).re
}

/// `K` with `Phi = A Re(e^{i delta} K)`.
fn window_coefficient(spec: &MeasurementSpec, p: &ClassicalFieldParams) -> Complex64 {
    let mut a = spec.t_start();
    let mut s = Complex64::new(0.0, 0.0);
    for seg in &spec.schedule.segments {
        let b = a + seg.dt;
        let fm = f64::from(seg.fe - seg.fg);
        if fm != 0.0 {
            let e = Complex64::from_polar(
                2.0 * (0.5 * p.omega * seg.dt).sin() / p.omega,
                0.5 * p.omega * (a + b),
            );
            s += fm * e;
        }
        a = b;
    }
    -SQRT_2 * p.lambda * s
}

/// Precomputed Monte Carlo sampler for 2 or 3 measurements.
#[derive(Debug, Clone)]
pub struct McPlan {
    phis: Vec<f64>,
    coeffs: Vec<Complex64>,
    sigma: f64,
}

impl McPlan {
    pub fn new(specs: &[MeasurementSpec], p: &ClassicalFieldParams) -> Result<Self> {
        p.validate()?;
        if !(2..=3).contains(&specs.len()) {
            return Err(Error::arg(
                "Monte Carlo correlation takes two or three measurements",
            ));
        }
        for s in specs {
            s.validate()?;
        }
        Ok(Self {
            phis: specs.iter().map(|s| s.phi).collect(),
            coeffs: specs.iter().map(|s| window_coefficient(s, p)).collect(),
            sigma: p.variance.sqrt(),
        })
    }

    /// Draws `count` trajectories from stream `shard` of `seed`.
    pub fn shard(&self, seed: u64, shard: u64, count: u64) -> Moments {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard);
        let mut m = Moments::new();
        for _ in 0..count {
            let u: f64 = 1.0 - rng.random::<f64>();
            let amp = self.sigma * (-2.0 * u.ln()).sqrt();
            let rot = Complex64::from_polar(amp, TAU * rng.random::<f64>());
            let mut prod = 1.0;
            for (phi, k) in self.phis.iter().zip(&self.coeffs) {
                prod *= (phi + (rot * k).re).cos();
            }
            m.push(prod);
        }
        m
    }

    /// `(shard index, sample count)` pairs covering `n_samples`.
    pub fn shards(n_samples: u64) -> impl Iterator<Item = (u64, u64)> {
        let full = n_samples / SHARD_SIZE;
        let rest = n_samples % SHARD_SIZE;
        (0..full)
            .map(|i| (i, SHARD_SIZE))
            .chain((rest > 0).then_some((full, rest)))
    }
}

/// Mean and standard error of the product of readouts; depends only on
/// `seed`, not on how shards are scheduled.
pub fn monte_carlo_correlation(
    specs: &[MeasurementSpec],
    p: &ClassicalFieldParams,
    n_samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::arg("Monte Carlo needs at least 10^4 samples"));
    }
    let plan = McPlan::new(specs, p)?;
    let mut total = Moments::new();
    for (shard, count) in McPlan::shards(n_samples) {
        total.merge(&plan.shard(seed, shard, count));
    }
    Ok((total.mean(), total.std_error()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn unit_params(variance: f64) -> ClassicalFieldParams {
        // tau = pi gives |alpha|^2 = 1
        ClassicalFieldParams {
            variance,
            omega: 1.0,
            lambda: 0.5,
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = unit_params(1.0);
        assert_abs_diff_eq!(
            classical_single(0.0, PI, &p),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_single(0.4, TAU, &p),
            0.4f64.cos(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_single(0.4, 1.0, &unit_params(0.0)),
            0.4f64.cos(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_two_time(0.0, 0.0, PI, PI / 2.0, &unit_params(0.5)),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_two_time(0.3, 0.9, PI, 1.0, &unit_params(0.0)),
            0.3f64.cos() * 0.9f64.cos(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_lgi_w(2.0, 1.0, 0.0, [0.0; 3]),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn window_phase_matches_midpoint_form() {
        let p = ClassicalFieldParams {
            variance: 1.0,
            omega: 1.3,
            lambda: 0.4,
        };
        let spec = MeasurementSpec::static_window(0.0, 0.9, 2.5).unwrap();
        let (amp, delta) = (1.7, 0.6);
        let want = -(8f64.sqrt() * amp * p.lambda / p.omega)
            * (p.omega * (spec.t_end - spec.tau / 2.0) + delta).cos()
            * (p.omega * spec.tau / 2.0).sin();
        assert_abs_diff_eq!(
            accumulated_phase(&spec, &p, amp, delta),
            want,
            epsilon = 1e-14
        );
    }

    #[test]
    fn monte_carlo_without_field_is_exact() {
        let p = unit_params(0.0);
        let specs = [
            MeasurementSpec::static_window(0.3, PI, PI).unwrap(),
            MeasurementSpec::static_window(1.1, PI, 3.0 * PI).unwrap(),
        ];
        let (m, se) = monte_carlo_correlation(&specs, &p, 20_000, 1).unwrap();
        assert_abs_diff_eq!(m, 0.3f64.cos() * 1.1f64.cos(), epsilon = 1e-14);
        assert_eq!(se, 0.0);
        assert!(monte_carlo_correlation(&specs, &p, 9_999, 1).is_err());
        assert!(monte_carlo_correlation(&specs[..1], &p, 20_000, 1).is_err());
    }

    #[test]
    fn monte_carlo_tracks_closed_form_and_is_reproducible() {
        let p = unit_params(0.5);
        let specs = [
            MeasurementSpec::static_window(0.0, PI, PI).unwrap(),
            MeasurementSpec::static_window(0.0, PI, PI + TAU + PI / 2.0).unwrap(),
        ];
        let (m, se) = monte_carlo_correlation(&specs, &p, 200_000, 7).unwrap();
        assert!((m - (-1.0f64).exp()).abs() < 4.0 * se, "{m} +- {se}");
        assert_eq!(
            monte_carlo_correlation(&specs, &p, 200_000, 7).unwrap(),
            (m, se)
        );
    }

    #[test]
    fn shards_cover_the_request() {
        let v: Vec<_> = McPlan::shards(2 * SHARD_SIZE + 5).collect();
        assert_eq!(v, [(0, SHARD_SIZE), (1, SHARD_SIZE), (2, 5)]);
    }

    proptest! {
        #[test]
        fn two_time_is_even_and_periodic(a in 0.0f64..3.0, th in -7.0f64..7.0, v in 0.0f64..3.0, p1 in -4.0f64..4.0, p2 in -4.0f64..4.0) {
            let c = classical_two_time_amp(a, th, v, p1, p2);
            prop_assert!((c - classical_two_time_amp(a, -th, v, p1, p2)).abs() < 1e-12);
            prop_assert!((c - classical_two_time_amp(a, th + TAU, v, p1, p2)).abs() < 1e-12);
        }

        #[test]
        fn witness_obeys_the_bound(a in 0.0f64..5.0, th in 0.0f64..TAU, v in 0.0f64..5.0, p in proptest::array::uniform3(0.0f64..TAU)) {
            prop_assert!(classical_lgi_w(a, th, v, p) <= 1.0 + 1e-9);
        }
    }
}
