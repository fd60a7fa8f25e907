//! Agreement statistics between analytic laws and Monte Carlo samples.

use serde::{Deserialize, Serialize};

use crate::pgf::TruncatedSeries;

/// Analytic bins are kept until the analytic CDF reaches this level; the
/// rest of both laws is pooled into one tail bin.
pub const TV_CDF_CUTOFF: f64 = 0.999;

/// Empirical PMF of non-negative integer outcomes.
pub fn empirical_pmf<I: IntoIterator<Item = usize>>(outcomes: I) -> Vec<f64> {
    let mut counts: Vec<u64> = Vec::new();
    let mut total = 0u64;
    for k in outcomes {
        if k >= counts.len() {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / total.max(1) as f64)
        .collect()
}

/// Total-variation distance between a truncated analytic PMF and an
/// empirical PMF, with the analytic tail mass folded into the last bin.
pub fn total_variation(analytic: &TruncatedSeries, empirical: &[f64]) -> f64 {
    let coeffs = analytic.coeffs();
    let mut cut = coeffs.len();
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        acc += c;
        if acc >= TV_CDF_CUTOFF {
            cut = k + 1;
            break;
        }
    }
    let emp = |k: usize| empirical.get(k).copied().unwrap_or(0.0);
    let head: f64 = (0..cut).map(|k| (coeffs[k] - emp(k)).abs()).sum();
    let analytic_tail = (1.0 - coeffs[..cut].iter().sum::<f64>()).max(0.0);
    let empirical_tail: f64 = empirical.iter().skip(cut).sum();
    0.5 * (head + (analytic_tail - empirical_tail).abs())
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Fraction of sorted samples strictly greater than `x`.
pub fn empirical_ccdf(sorted: &[f64], x: f64) -> f64 {
    let at_most = sorted.partition_point(|&s| s <= x);
    (sorted.len() - at_most) as f64 / sorted.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            std_err: (var / n).sqrt(),
            count: samples.len(),
        }
    }

    /// Deviation of `target` from the estimate in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_counts() {
        let p = empirical_pmf([1, 3, 3, 0]);
        assert_eq!(p, vec![0.25, 0.25, 0.0, 0.5]);
        assert!(empirical_pmf(std::iter::empty()).is_empty());
    }

    #[test]
    fn tv_of_identical_laws_is_zero() {
        let s = TruncatedSeries::from_coeffs(vec![0.0, 0.5, 0.25, 0.125, 0.0625]);
        let mut emp = s.coeffs().to_vec();
        emp.push(s.tail_mass());
        assert!(total_variation(&s, &emp) < 1e-15);
        let shifted = vec![0.0, 0.0, 0.5, 0.25, 0.125, 0.125];
        assert!((total_variation(&s, &shifted) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let samples: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&samples, |x| x) - 0.005).abs() < 1e-12);
        assert!((ks_statistic(&[0.5], |x| x) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ccdf_and_mean() {
        let s = [0.1, 0.2, 0.2, 0.9];
        assert_eq!(empirical_ccdf(&s, 0.2), 0.25);
        assert_eq!(empirical_ccdf(&s, 0.0), 1.0);
        let m = MeanEstimate::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std_err - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((m.z_score(3.0) - 3f64.sqrt()).abs() < 1e-12);
    }
}
