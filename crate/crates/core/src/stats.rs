//! Goodness-of-fit statistics against a uniform distribution.

/// Chi-square critical value for 15 degrees of freedom at significance 0.001.
pub const CHI2_CRIT_15_DOF_P001: f64 = 37.697_298_218_353_83;

/// Asymptotic Kolmogorov critical value `K` at significance 0.001; reject
/// when `sqrt(n) * D > K`.
pub const KS_CRIT_P001: f64 = 1.949_474_603_504_375;

/// Pearson chi-square statistic of `samples` against uniform on `[lo, hi)`
/// with `bins` equal-width bins.
pub fn chi_square_uniform(samples: &[f64], lo: f64, hi: f64, bins: usize) -> f64 {
    assert!(bins > 0 && hi > lo);
    let mut counts = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Kolmogorov–Smirnov statistic `D` of `samples` against uniform on `[lo, hi)`.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted: Vec<f64> = samples.iter().map(|&x| (x - lo) / (hi - lo)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &u)| {
        let above = (i + 1) as f64 / n - u;
        let below = u - i as f64 / n;
        d.max(above).max(below)
    })
}
