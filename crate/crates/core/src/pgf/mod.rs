//! CRI generating functions for splitting-tree and auction relay selection.

mod auction;
mod inversion;
mod series;
mod split;
mod tree;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use auction::{auction_pgf, auction_skip_pgf};
pub use inversion::{invert_fourier, Inversion, InversionParams};
pub use series::{Moments, TruncatedSeries, COEFF_SLACK, MOMENT_TAIL_LIMIT};
pub use split::{binomial_pmf, split_prob, SplitModel};
pub use tree::{sta_pgf_binary, sta_pgf_qary, COMPOSITION_LIMIT};

use crate::error::{CgfError, Result};
use split::binomial_pmf as bpmf;
use tree::{composition_weight, for_each_composition};

/// Starting truncation for [`pgf_adaptive`].
pub const ADAPTIVE_START: usize = 128;
/// Largest truncation [`pgf_adaptive`] will try.
pub const ADAPTIVE_CAP: usize = 16_384;
/// Tail mass accepted by [`pgf_adaptive`].
pub const ADAPTIVE_TAIL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Full splitting-tree resolution.
    Sta,
    /// Auction with tree pruning; an idle first band costs an extra slot.
    Auction,
    /// Auction with pruning and level skipping after an idle band.
    AuctionSkip,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sta, Algorithm::Auction, Algorithm::AuctionSkip];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sta => "sta",
            Algorithm::Auction => "auction",
            Algorithm::AuctionSkip => "auction-skip",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sta" => Ok(Algorithm::Sta),
            "auction" => Ok(Algorithm::Auction),
            "auction-skip" | "auction_skip" => Ok(Algorithm::AuctionSkip),
            other => Err(CgfError::Usage(format!(
                "unknown protocol '{other}' (expected sta, auction or auction-skip)"
            ))),
        }
    }
}

/// Truncated CRI series for `algo` under `model`.
pub fn pgf(algo: Algorithm, model: &SplitModel, k_max: usize) -> Result<TruncatedSeries> {
    match algo {
        Algorithm::Sta if model.q() == 2 => sta_pgf_binary(model, k_max),
        Algorithm::Sta => sta_pgf_qary(model, k_max),
        Algorithm::Auction => auction_pgf(model, k_max),
        Algorithm::AuctionSkip => auction_skip_pgf(model, k_max),
    }
}

/// Doubles `k_max` from [`ADAPTIVE_START`] until the tail mass drops below
/// [`ADAPTIVE_TAIL`].
pub fn pgf_adaptive(algo: Algorithm, model: &SplitModel) -> Result<TruncatedSeries> {
    let mut k_max = ADAPTIVE_START;
    loop {
        let series = pgf(algo, model, k_max)?;
        if series.tail_mass() < ADAPTIVE_TAIL {
            return Ok(series);
        }
        if k_max >= ADAPTIVE_CAP {
            return Err(CgfError::Resource(format!(
                "tail mass {:e} still above {ADAPTIVE_TAIL:e} at k_max = {k_max}",
                series.tail_mass()
            )));
        }
        k_max *= 2;
    }
}

/// Evaluates `G_N(z)` directly by running the recursion on complex scalars.
///
/// This never touches the truncated coefficients, so it is an independent
/// route to compare series extraction against.
pub fn pgf_at(algo: Algorithm, model: &SplitModel, z: Complex64) -> Result<Complex64> {
    let n = model.n();
    let mut g = vec![z, z];
    match algo {
        Algorithm::Sta if model.q() == 2 => {
            let p = model.probs()[0];
            for m in 2..=n {
                let rhs: Complex64 = (1..m).map(|i| g[i] * g[m - i] * bpmf(m, i, p)).sum();
                let c = bpmf(m, 0, p) + bpmf(m, m, p);
                g.push(z * rhs / (1.0 - z * z * c));
            }
        }
        Algorithm::Sta => {
            let probs = model.probs();
            let q = model.q();
            for m in 2..=n {
                let mut rhs = Complex64::new(0.0, 0.0);
                for_each_composition(m, q, &mut |parts| {
                    if parts.iter().all(|&i| i < m) {
                        let prod: Complex64 = parts.iter().map(|&i| g[i]).product();
                        rhs += prod * composition_weight(parts, probs);
                    }
                });
                let c: f64 = probs.iter().map(|p| p.powi(m as i32)).sum();
                g.push(z * rhs / (1.0 - z.powu(q as u32) * c));
            }
        }
        Algorithm::Auction | Algorithm::AuctionSkip => {
            let p = model.require_binary()?;
            for m in 2..=n {
                let inner: Complex64 = (2..m).map(|i| g[i] * bpmf(m, i, p)).sum();
                let num = z * z * bpmf(m, 1, p) + z * inner;
                let (b0, bm) = (bpmf(m, 0, p), bpmf(m, m, p));
                let den = if algo == Algorithm::Auction {
                    1.0 - z * z * b0 - z * bm
                } else {
                    1.0 - z * (b0 + bm)
                };
                g.push(num / den);
            }
        }
    }
    Ok(g[n])
}
