use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CgfError, Result};

/// Slack tolerated on individual coefficients.
pub const COEFF_SLACK: f64 = 1e-12;

/// Tail mass above which [`TruncatedSeries::moments`] refuses to answer.
pub const MOMENT_TAIL_LIMIT: f64 = 1e-6;

/// Power series with non-negative coefficients, truncated at `k_max`.
///
/// `coeffs[k]` is the probability that the CRI lasts exactly `k` slots.
/// Everything beyond the last coefficient is summarized by `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
    tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// Estimated contribution of the truncated tail to the mean.
    pub mean_tail_bound: f64,
    /// Geometric decay rate of the last coefficients (0 when not estimable).
    pub decay_rate: f64,
}

impl TruncatedSeries {
    /// Wraps a coefficient vector; the tail mass is whatever the
    /// coefficients leave of a unit total.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "series needs at least the z^0 coefficient"
        );
        let total: f64 = coeffs.iter().sum();
        TruncatedSeries {
            coeffs,
            tail_mass: (1.0 - total).max(0.0),
        }
    }

    /// The series of `G(z) = z^k`.
    pub fn monomial(k: usize, k_max: usize) -> Self {
        let mut coeffs = vec![0.0; k_max + 1];
        if k <= k_max {
            coeffs[k] = 1.0;
        }
        Self::from_coeffs(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn total(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Smallest index carrying more than [`COEFF_SLACK`] of mass.
    pub fn min_support(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c > COEFF_SLACK)
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .scan(0.0, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }

    /// Index at which the cumulative mass first reaches `level`.
    pub fn quantile_index(&self, level: f64) -> Option<usize> {
        self.cdf().iter().position(|&c| c >= level)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c)
            .sum()
    }

    pub fn moments(&self) -> Result<Moments> {
        if self.tail_mass >= MOMENT_TAIL_LIMIT {
            return Err(CgfError::InsufficientTruncation {
                tail_mass: self.tail_mass,
                k_max: self.k_max(),
            });
        }
        let mean = self.mean();
        let second: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (k * k) as f64 * c)
            .sum();
        let decay_rate = self.decay_rate();
        // Geometric tail beyond k_max: each unit of mass sits on average
        // 1/(1-rho) slots past the truncation point.
        let mean_tail_bound = if decay_rate > 0.0 && decay_rate < 1.0 {
            self.tail_mass * (self.k_max() as f64 + 1.0 / (1.0 - decay_rate))
        } else {
            self.tail_mass * self.k_max() as f64
        };
        Ok(Moments {
            mean,
            variance: second - mean * mean,
            mean_tail_bound,
            decay_rate,
        })
    }

    /// Per-slot decay rate comparing the last ten coefficients with the ten
    /// before them. Block sums keep the estimate stable under parity gaps.
    fn decay_rate(&self) -> f64 {
        let n = self.coeffs.len();
        if n < 20 {
            return 0.0;
        }
        let last: f64 = self.coeffs[n - 10..].iter().sum();
        let prev: f64 = self.coeffs[n - 20..n - 10].iter().sum();
        if prev <= 0.0 || last <= 0.0 {
            return 0.0;
        }
        (last / prev).powf(0.1)
    }

    /// Checks the non-negativity and normalization invariants.
    pub fn check_invariants(&self, tol: f64) -> bool {
        self.coeffs
            .iter()
            .all(|&c| (-COEFF_SLACK..=1.0 + COEFF_SLACK).contains(&c))
            && (self.total() + self.tail_mass - 1.0).abs() <= tol
    }
}

/// `(a * b)` truncated to `len` coefficients.
#[cfg(test)]
pub(crate) fn convolve_truncated(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    accumulate_product(&mut out, a, b, 1.0);
    out
}

/// `out += scale * (a * b)`, truncated to `out.len()`.
pub(crate) fn accumulate_product(out: &mut [f64], a: &[f64], b: &[f64], scale: f64) {
    let len = out.len();
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        let w = scale * ai;
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o += w * bj;
        }
    }
}

/// Multiplies by `z^s` in place, dropping what falls off the end.
pub(crate) fn shift_up(a: &mut [f64], s: usize) {
    if s == 0 {
        return;
    }
    let len = a.len();
    if s >= len {
        a.fill(0.0);
        return;
    }
    a.copy_within(0..len - s, s);
    a[..s].fill(0.0);
}
