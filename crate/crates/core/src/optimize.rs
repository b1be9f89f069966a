//! Derivative-free local minimization (Nelder–Mead simplex).

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOpts {
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Stop once the spread of function values in the simplex falls below this.
    pub f_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    pub iterations: usize,
}

/// Minimizes `f` from `x0` with the standard reflection / expansion /
/// contraction / shrink moves. Fully deterministic.
pub fn nelder_mead<const N: usize>(
    f: impl Fn(&[f64; N]) -> f64,
    x0: [f64; N],
    opts: SimplexOpts,
) -> SimplexResult<N> {
    let mut pts = [[0.0; N]; 8];
    assert!(N < pts.len(), "nelder_mead supports at most 7 dimensions");
    let mut vals = [0.0; 8];
    let m = N + 1;
    pts[0] = x0;
    for i in 0..N {
        let mut p = x0;
        p[i] += opts.step;
        pts[i + 1] = p;
    }
    for i in 0..m {
        vals[i] = f(&pts[i]);
    }

    let mut iterations = 0;
    while iterations < opts.max_iter {
        // insertion sort keeps ties in their original order
        for i in 1..m {
            let mut j = i;
            while j > 0 && vals[j] < vals[j - 1] {
                vals.swap(j, j - 1);
                pts.swap(j, j - 1);
                j -= 1;
            }
        }
        if vals[N] - vals[0] <= opts.f_tol {
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for p in &pts[..N] {
            for k in 0..N {
                centroid[k] += p[k] / N as f64;
            }
        }
        let along = |t: f64| {
            let mut q = [0.0; N];
            for k in 0..N {
                q[k] = centroid[k] + t * (pts[N][k] - centroid[k]);
            }
            q
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[N] = xe;
                vals[N] = fe;
            } else {
                pts[N] = xr;
                vals[N] = fr;
            }
            continue;
        }
        if fr < vals[N - 1] {
            pts[N] = xr;
            vals[N] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[N] {
            let x = along(-0.5);
            (x, f(&x))
        } else {
            let x = along(0.5);
            (x, f(&x))
        };
        if fc < vals[N].min(fr) {
            pts[N] = xc;
            vals[N] = fc;
            continue;
        }
        let best = pts[0];
        for i in 1..m {
            for k in 0..N {
                pts[i][k] = best[k] + 0.5 * (pts[i][k] - best[k]);
            }
            vals[i] = f(&pts[i]);
        }
    }

    let mut b = 0;
    for i in 1..m {
        if vals[i] < vals[b] {
            b = i;
        }
    }
    SimplexResult {
        x: pts[b],
        f: vals[b],
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let r = nelder_mead(
            |x: &[f64; 2]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            [0.0, 0.0],
            SimplexOpts {
                step: 0.5,
                f_tol: 1e-16,
                max_iter: 2000,
            },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x: &[f64; 2]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            [-1.2, 1.0],
            SimplexOpts {
                step: 0.3,
                f_tol: 1e-18,
                max_iter: 5000,
            },
        );
        assert!(r.f < 1e-12, "{r:?}");
    }
}
