use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Evaluation radius for the Fourier-series inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionParams {
    /// Fixed radius; when `None` the radius is derived from `gamma`.
    pub r: Option<f64>,
    /// Target aliasing exponent: the aliasing error is about `10^-gamma`.
    pub gamma: f64,
}

impl Default for InversionParams {
    fn default() -> Self {
        InversionParams {
            r: None,
            gamma: 8.0,
        }
    }
}

impl InversionParams {
    pub fn radius(&self, k: usize) -> f64 {
        self.r
            .unwrap_or_else(|| 10f64.powf(-self.gamma / (2.0 * k as f64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    /// Estimate clamped to `[0, 1]`.
    pub probability: f64,
    /// Estimate before clamping.
    pub raw: f64,
    pub radius: f64,
}

/// Recovers `Pr{L = k}` from point evaluations of its generating function
/// on the circle of radius `r`:
/// `(1 / (2 k r^k)) * sum_{j=1}^{2k} (-1)^j Re G(r e^{i pi j / k})`.
pub fn invert_fourier<F>(pgf: F, k: usize, params: &InversionParams) -> Result<Inversion>
where
    F: Fn(Complex64) -> Complex64,
{
    if k == 0 {
        return domain("inversion is undefined at k = 0; read the z^0 coefficient directly");
    }
    let r = params.radius(k);
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("inversion radius {r} outside (0, 1)"));
    }
    let kf = k as f64;
    let sum: f64 = (1..=2 * k)
        .map(|j| {
            let z = Complex64::from_polar(r, PI * j as f64 / kf);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * pgf(z).re
        })
        .sum();
    let raw = sum / (2.0 * kf * r.powi(k as i32));
    Ok(Inversion {
        probability: raw.clamp(0.0, 1.0),
        raw,
        radius: r,
    })
}
