//! Small goodness-of-fit helpers used by the property suites.

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let lo = f - i as f64 / n;
        let hi = (i + 1) as f64 / n - f;
        d.max(lo).max(hi)
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Pearson chi-square statistic for observed counts against equal expectation.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum()
}

/// Upper 1% quantile of the chi-square law with `dof` degrees of freedom
/// (Wilson-Hilferty approximation; within 1% of tables for dof >= 1).
pub fn chi_square_critical_1pct(dof: usize) -> f64 {
    let k = dof as f64;
    let z = 2.326_347_874_040_841;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Mean and standard error of the mean of complex values.
pub fn complex_mean_stderr(values: &[num_complex::Complex64]) -> (num_complex::Complex64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<num_complex::Complex64>() / n;
    let var = values.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_perfect_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn chi_square_quantiles_match_tables() {
        // tabulated 99% quantiles
        for (dof, q) in [(1, 6.635), (2, 9.210), (4, 13.277), (6, 16.812), (10, 23.209)] {
            let approx = chi_square_critical_1pct(dof);
            assert!((approx - q).abs() / q < 0.02, "dof {dof}: {approx} vs {q}");
        }
    }
}
