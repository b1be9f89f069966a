//! Compensated sums and streaming moments.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Neumaier-compensated sum; the result is independent of magnitude ordering
/// to within a few ulps.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Running mean and variance (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Combines two disjoint sample sets.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.count as f64 * w;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn constant_samples_have_zero_spread() {
        let mut m = Moments::new();
        for _ in 0..1000 {
            m.push(0.3);
        }
        assert_eq!(m.variance(), 0.0);
        assert_eq!(m.std_error(), 0.0);
    }

    proptest! {
        #[test]
        fn merge_matches_single_pass(xs in proptest::collection::vec(-10.0f64..10.0, 2..200), cut in 0usize..200) {
            let cut = cut % xs.len();
            let mut all = Moments::new();
            xs.iter().for_each(|&x| all.push(x));
            let (mut a, mut b) = (Moments::new(), Moments::new());
            xs[..cut].iter().for_each(|&x| a.push(x));
            xs[cut..].iter().for_each(|&x| b.push(x));
            a.merge(&b);
            prop_assert_eq!(a.count(), all.count());
            prop_assert!((a.mean() - all.mean()).abs() < 1e-12);
            prop_assert!((a.variance() - all.variance()).abs() < 1e-9);
        }
    }
}
