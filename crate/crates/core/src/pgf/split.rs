use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{domain, Result};

/// Above this multiplicity binomial weights go through log space.
const DIRECT_BINOMIAL_LIMIT: usize = 50;

/// Contention parameters: `n` initially colliding contenders split into
/// `q = probs.len()` groups, a contender joining group `j` with `probs[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitModel {
    n: usize,
    probs: Vec<f64>,
}

impl SplitModel {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return domain(format!(
                "need at least 2 splitting groups, got {}",
                probs.len()
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return domain(format!("group probability {p} outside [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("group probabilities sum to {total}, expected 1"));
        }
        Ok(SplitModel { n, probs })
    }

    /// Binary split with probability `p` of joining the first group.
    pub fn binary(n: usize, p: f64) -> Result<Self> {
        Self::new(n, vec![p, 1.0 - p])
    }

    /// Fair `q`-sided coin.
    pub fn fair(n: usize, q: usize) -> Result<Self> {
        if q < 2 {
            return domain(format!("need at least 2 splitting groups, got {q}"));
        }
        Self::new(n, vec![1.0 / q as f64; q])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Same coin, different multiplicity.
    pub fn with_n(&self, n: usize) -> Self {
        SplitModel {
            n,
            probs: self.probs.clone(),
        }
    }

    pub(crate) fn require_binary(&self) -> Result<f64> {
        if self.q() != 2 {
            return domain(format!(
                "operation needs a binary split, model has q = {}",
                self.q()
            ));
        }
        Ok(self.probs[0])
    }
}

/// `B_{N,i}`: probability that exactly `i` of the model's `n` contenders
/// pick the first group of a binary split.
pub fn split_prob(model: &SplitModel, i: usize) -> Result<f64> {
    let p = model.require_binary()?;
    if i > model.n() {
        return domain(format!("split size {i} exceeds multiplicity {}", model.n()));
    }
    Ok(binomial_pmf(model.n(), i, p))
}

/// Binomial probability mass `C(n,i) p^i (1-p)^(n-i)`.
pub fn binomial_pmf(n: usize, i: usize, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if i == n { 1.0 } else { 0.0 };
    }
    if n <= DIRECT_BINOMIAL_LIMIT {
        binomial_coeff(n, i) * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32)
    } else {
        let ln =
            ln_binomial(n as u64, i as u64) + i as f64 * p.ln() + (n - i) as f64 * (-p).ln_1p();
        ln.exp()
    }
}

/// Exact in f64 for `n <= 50`.
pub(crate) fn binomial_coeff(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}
