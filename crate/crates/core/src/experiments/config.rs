use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CgfError, Result};
use crate::geometry::{calibrate_sdr, LensRegion, Point2, Region, SectorRegion};
use crate::pgf::SplitModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    CriPmfSta,
    CriPmfAuction,
    DistPdfSdr,
    DistPdfCdr,
    IterGainNearest,
    IterGainFurthest,
    ExpDistNearest,
    ExpDistFurthest,
    ProgressVsCriSta,
    ProgressVsCriAuction,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::CriPmfSta,
        ExperimentId::CriPmfAuction,
        ExperimentId::DistPdfSdr,
        ExperimentId::DistPdfCdr,
        ExperimentId::IterGainNearest,
        ExperimentId::IterGainFurthest,
        ExperimentId::ExpDistNearest,
        ExperimentId::ExpDistFurthest,
        ExperimentId::ProgressVsCriSta,
        ExperimentId::ProgressVsCriAuction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::CriPmfSta => "cri_pmf_sta",
            ExperimentId::CriPmfAuction => "cri_pmf_auction",
            ExperimentId::DistPdfSdr => "dist_pdf_sdr",
            ExperimentId::DistPdfCdr => "dist_pdf_cdr",
            ExperimentId::IterGainNearest => "iter_gain_nearest",
            ExperimentId::IterGainFurthest => "iter_gain_furthest",
            ExperimentId::ExpDistNearest => "exp_dist_nearest",
            ExperimentId::ExpDistFurthest => "exp_dist_furthest",
            ExperimentId::ProgressVsCriSta => "progress_vs_cri_sta",
            ExperimentId::ProgressVsCriAuction => "progress_vs_cri_auction",
        }
    }

    /// Multiplicities swept when the config leaves the range open.
    pub fn default_range(self) -> NRange {
        match self {
            ExperimentId::CriPmfSta | ExperimentId::CriPmfAuction => NRange::new(2, 5),
            ExperimentId::DistPdfSdr
            | ExperimentId::DistPdfCdr
            | ExperimentId::IterGainNearest
            | ExperimentId::IterGainFurthest => NRange::new(5, 5),
            _ => NRange::new(1, 10),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = CgfError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let ids: Vec<&str> = ExperimentId::ALL.iter().map(|id| id.name()).collect();
                CgfError::Usage(format!(
                    "unknown experiment '{s}'; expected one of: {}",
                    ids.join(", ")
                ))
            })
    }
}

/// Inclusive range of initial multiplicities, written `2..5` or `5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub min: usize,
    pub max: usize,
}

impl NRange {
    pub fn new(min: usize, max: usize) -> Self {
        NRange { min, max }
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        self.min..=self.max
    }
}

impl FromStr for NRange {
    type Err = CgfError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CgfError::Usage(format!("bad N range '{s}'; expected N or MIN..MAX"));
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let range = match s.split_once("..") {
            Some((a, b)) => NRange::new(parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                NRange::new(n, n)
            }
        };
        if range.min > range.max {
            return Err(bad());
        }
        Ok(range)
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

/// Pass/fail limits for the analytic-vs-simulation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub tv: f64,
    pub ks: f64,
    /// Largest tolerated |z| between an analytic mean and a sample mean.
    pub z: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tv: 0.01,
            ks: 0.01,
            z: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    #[serde(default)]
    pub n: Option<NRange>,
    #[serde(default = "default_q")]
    pub q: usize,
    /// Binary coin bias; `None` means a fair `q`-sided coin.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_range")]
    pub range: f64,
    /// Lens radius; defaults to the transmission range.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Sector aperture; defaults to the area-matched lens calibration.
    #[serde(default)]
    pub aperture: Option<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Auction experiments use the skipping variant.
    #[serde(default)]
    pub skip: bool,
    /// Distance grid intervals for PDF tables.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_q() -> usize {
    2
}
fn default_range() -> f64 {
    1.0
}
fn default_replications() -> usize {
    100_000
}
pub(crate) fn default_seed() -> u64 {
    1
}
fn default_grid() -> usize {
    100
}
fn default_rounds() -> usize {
    3
}

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentConfig {
            id,
            n: None,
            q: default_q(),
            p: None,
            range: default_range(),
            rho: None,
            aperture: None,
            replications: default_replications(),
            seed: default_seed(),
            skip: false,
            grid: default_grid(),
            rounds: default_rounds(),
            thresholds: Thresholds::default(),
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn n_range(&self) -> NRange {
        self.n.unwrap_or_else(|| self.id.default_range())
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CgfError::Usage(m));
        if !(self.range > 0.0 && self.range.is_finite()) {
            return usage(format!("range must be positive, got {}", self.range));
        }
        if self.replications == 0 {
            return usage("replications must be at least 1".into());
        }
        if self.q < 2 {
            return usage(format!("q must be at least 2, got {}", self.q));
        }
        if let Some(p) = self.p {
            if self.q != 2 {
                return usage("a coin bias p needs q = 2".into());
            }
            if !(p > 0.0 && p < 1.0) {
                return usage(format!("p must lie in (0, 1), got {p}"));
            }
        }
        if self.grid == 0 || self.rounds == 0 {
            return usage("grid and rounds must be at least 1".into());
        }
        let n = self.n_range();
        let needs_contenders = !matches!(
            self.id,
            ExperimentId::CriPmfSta | ExperimentId::CriPmfAuction
        );
        if needs_contenders && n.min == 0 {
            return usage("distance experiments need N >= 1".into());
        }
        if self.id == ExperimentId::CriPmfAuction && self.q != 2 {
            return usage("auction PGFs are binary; use q = 2".into());
        }
        Ok(())
    }

    /// Splitting probabilities (STA coin or auction band masses).
    pub fn probs(&self) -> Result<Vec<f64>> {
        let model = match self.p {
            Some(p) => SplitModel::binary(0, p)?,
            None => SplitModel::fair(0, self.q)?,
        };
        Ok(model.probs().to_vec())
    }

    pub fn destination(&self) -> Point2 {
        Point2::new(2.0 * self.range, 0.0)
    }

    pub fn lens(&self) -> Result<LensRegion> {
        LensRegion::toward(
            Point2::ORIGIN,
            self.destination(),
            self.range,
            self.rho.unwrap_or(self.range),
        )
    }

    pub fn sector(&self) -> Result<SectorRegion> {
        match self.aperture {
            Some(a) => SectorRegion::toward(Point2::ORIGIN, self.destination(), self.range, a),
            None => calibrate_sdr(&self.lens()?),
        }
    }

    pub fn sdr(&self) -> Result<Region> {
        Ok(Region::Sector(self.sector()?))
    }

    pub fn cdr(&self) -> Result<Region> {
        Ok(Region::Lens(self.lens()?))
    }

    /// SHA-256 of the canonical JSON form, ignoring the output path.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
