//! Small numerical kernels shared by the model modules.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Leaves at or below this length are summed sequentially.
const PAIRWISE_LEAF: usize = 64;
/// Subtrees above this length are split across rayon workers.
const PARALLEL_SPLIT: usize = 1 << 14;

/// Pairwise (tree) summation.
///
/// The tree shape depends only on `values.len()`, so the result is
/// bit-identical for any number of rayon workers.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_LEAF {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    if values.len() > PARALLEL_SPLIT {
        let (l, r) = rayon::join(|| pairwise_sum(left), || pairwise_sum(right));
        l + r
    } else {
        pairwise_sum(left) + pairwise_sum(right)
    }
}

/// Composite Simpson rule for `f` over `[a, b]` with an even number of panels.
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if panels < 8 || panels % 2 != 0 {
        return Err(Error::InvalidPanels(panels));
    }
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    Ok(h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b)))
}

/// Running mean and variance (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(self, other: RunningStats) -> RunningStats {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        RunningStats { count, mean, m2 }
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
            self.m2 / (self.count - 1) as f64
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

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = reduce_angle(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest round-trip decimal text for `x`, switching to exponent notation
/// for very large or very small magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 8).unwrap();
        assert!((v - 2.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn simpson_rejects_bad_panels() {
        assert!(matches!(simpson(|x| x, 0.0, 1.0, 7), Err(Error::InvalidPanels(7))));
        assert!(matches!(simpson(|x| x, 0.0, 1.0, 6), Err(Error::InvalidPanels(6))));
        assert!(simpson(|x| x, 0.0, 1.0, 8).is_ok());
    }

    #[test]
    fn simpson_sine_converges() {
        let v = simpson(f64::sin, 0.0, PI, 256).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..100_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 99_999.0 * 100_000.0 / 2.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn pairwise_sum_independent_of_thread_count() {
        let v: Vec<f64> = (0..200_000).map(|i| ((i as f64) * 0.37).sin() * 1e-3).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| pairwise_sum(&v));
        let b = four.install(|| pairwise_sum(&v));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn merged_stats_match_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 37.0).collect();
        let mut whole = RunningStats::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = RunningStats::default();
        let mut right = RunningStats::default();
        xs[..313].iter().for_each(|&x| left.push(x));
        xs[313..].iter().for_each(|&x| right.push(x));
        let merged = left.merge(right);
        assert_eq!(merged.count(), 1000);
        assert!((merged.mean() - whole.mean()).abs() < 1e-12);
        assert!((merged.variance() - whole.variance()).abs() < 1e-10);
    }

    #[test]
    fn angle_reduction() {
        assert_eq!(reduce_angle(TAU), 0.0);
        assert_eq!(reduce_angle(-PI / 2.0), 1.5 * PI);
        assert!(reduce_angle(-1e-300) < TAU);
        assert_eq!(wrap_angle(1.5 * PI), -PI / 2.0);
        assert_eq!(wrap_angle(PI), PI);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn formatted_floats_round_trip() {
        for x in [0.0, 1.0, -0.1, 1e-16, 2997.9245800000003, 1.4142135623730951, 6.02e23, -3e-300] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
