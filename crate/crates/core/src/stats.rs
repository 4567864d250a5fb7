//! Deterministic summary statistics over replications.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::rng::{stream_rng, Stream};

/// Pairwise (tree) summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(x: &[f64]) -> f64 {
    pairwise_sum(x) / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&d) / (x.len() as f64 - 1.0)
}

/// Sample mean with its standard error.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    (mean(x), (variance(x) / x.len() as f64).sqrt())
}

/// Sample covariance of paired data with the standard error of the estimate,
/// computed from the per-replication products.
pub fn covariance_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let prod: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let cov = pairwise_sum(&prod) / (n - 1.0);
    let (_, se) = mean_se(&prod);
    (cov, se)
}

/// Sample skewness g₁ and excess kurtosis g₂ (moment estimators).
pub fn skew_kurt(x: &[f64]) -> (f64, f64) {
    let m = mean(x);
    let c2: Vec<f64> = x.iter().map(|v| (v - m).powi(2)).collect();
    let c3: Vec<f64> = x.iter().map(|v| (v - m).powi(3)).collect();
    let c4: Vec<f64> = x.iter().map(|v| (v - m).powi(4)).collect();
    let (m2, m3, m4) = (mean(&c2), mean(&c3), mean(&c4));
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Asymptotic standard errors of skewness and excess kurtosis under normality.
pub fn skew_kurt_se_normal(n: usize) -> (f64, f64) {
    let n = n as f64;
    let s = (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt();
    let k = 2.0 * s * ((n * n - 1.0) / ((n - 3.0) * (n + 5.0))).sqrt();
    (s, k)
}

fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let m = mean(x);
    let mk = |k: i32| {
        let v: Vec<f64> = x.iter().map(|a| (a - m).powi(k)).collect();
        mean(&v)
    };
    (m, mk(2), mk(3), mk(4))
}

/// Standard error of the skewness from its empirical influence function;
/// valid for non-Gaussian data.
pub fn skewness_se(x: &[f64]) -> f64 {
    let (m, m2, m3, _) = central_moments(x);
    let infl: Vec<f64> = x
        .iter()
        .map(|a| {
            let c = a - m;
            (c.powi(3) - m3 - 3.0 * m2 * c) / m2.powf(1.5) - 1.5 * m3 / m2.powf(2.5) * (c * c - m2)
        })
        .collect();
    (variance(&infl) / x.len() as f64).sqrt()
}

/// Standard error of the excess kurtosis from its empirical influence function.
pub fn kurtosis_se(x: &[f64]) -> f64 {
    let (m, m2, m3, m4) = central_moments(x);
    let infl: Vec<f64> = x
        .iter()
        .map(|a| {
            let c = a - m;
            (c.powi(4) - m4 - 4.0 * m3 * c) / (m2 * m2) - 2.0 * m4 / m2.powi(3) * (c * c - m2)
        })
        .collect();
    (variance(&infl) / x.len() as f64).sqrt()
}

/// Bootstrap standard error of a statistic, deterministic given `seed`.
pub fn bootstrap_se<F: Fn(&[f64]) -> f64>(x: &[f64], stat: F, n_boot: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 0, Stream::Bootstrap);
    let n = x.len();
    let mut buf = vec![0.0; n];
    let vals: Vec<f64> = (0..n_boot)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = x[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect();
    variance(&vals).sqrt()
}

/// Least-squares slope of y on x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    pairwise_sum(&sxy) / pairwise_sum(&sxx)
}

/// Two-sided standard-normal threshold that keeps the family-wise error of
/// `m` tests at the level of a single |z| ≤ `z_single` test.
pub fn bonferroni_threshold(z_single: f64, m: usize) -> f64 {
    let normal = Normal::standard();
    let family = 2.0 * (1.0 - normal.cdf(z_single));
    let per = family / m.max(1) as f64;
    normal.inverse_cdf(1.0 - per / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn pairwise_matches_naive() {
        let x: Vec<f64> = (0..1001).map(|i| (i as f64).sin()).collect();
        assert_relative_eq!(pairwise_sum(&x), x.iter().sum::<f64>(), max_relative = 1e-12);
    }

    #[test]
    fn moments_of_known_data() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert_relative_eq!(variance(&x), 5.0 / 3.0);
        assert_relative_eq!(ols_slope(&x, &[3.0, 5.0, 7.0, 9.0]), 2.0);
        let (s, k) = skew_kurt(&x);
        assert!(s.abs() < 1e-15);
        assert_relative_eq!(k, 1.64 - 3.0, max_relative = 1e-12);
    }

    #[test]
    fn bonferroni_reduces_to_single_test() {
        assert_relative_eq!(bonferroni_threshold(4.0, 1), 4.0, max_relative = 1e-9);
        let z = bonferroni_threshold(4.0, 15);
        assert!(z > 4.0 && z < 5.0);
    }

    #[test]
    fn delta_method_ses_match_normal_theory() {
        let mut rng = stream_rng(1, 0, Stream::Remainder);
        let x: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (s, k) = skew_kurt_se_normal(x.len());
        assert_relative_eq!(skewness_se(&x), s, max_relative = 0.05);
        assert_relative_eq!(kurtosis_se(&x), k, max_relative = 0.05);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = bootstrap_se(&x, mean, 200, 5);
        let b = bootstrap_se(&x, mean, 200, 5);
        assert_eq!(a, b);
        let (_, se) = mean_se(&x);
        assert_relative_eq!(a, se, max_relative = 0.2);
    }
}
