//! Sample summaries and the standard normal distribution.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::summation::pairwise_sum_by;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum_by(xs.len(), |i| xs[i]) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    pairwise_sum_by(xs.len(), |i| (xs[i] - m).powi(2)) / (xs.len() as f64 - 1.0)
}

/// Monte Carlo standard error of the sample mean.
pub fn mean_se(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Monte Carlo standard error of the sample variance, `√((m4 - s⁴)/n)`.
pub fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = pairwise_sum_by(xs.len(), |i| (xs[i] - m).powi(2)) / n;
    let m4 = pairwise_sum_by(xs.len(), |i| (xs[i] - m).powi(4)) / n;
    ((m4 - m2 * m2).max(0.0) / n).sqrt()
}

/// Linear-interpolation quantile (type 7) of an ascending sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_relative_eq!(
            normal_cdf(1.959_963_984_540_054),
            0.975,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            normal_quantile(0.975),
            1.959_963_984_540_054,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            normal_sf(10.0),
            7.619_853_024_160_527e-24,
            max_relative = 1e-9
        );
    }

    #[test]
    fn summaries() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert_relative_eq!(variance(&xs), 5.0 / 3.0);
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
    }
}
