use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::auction::{run_auction, AuctionOptions};
use super::record::{CriRecord, SimOptions};
use super::sta::run_sta;
use crate::error::{domain, Result};
use crate::geometry::{sample_topology_with, Region, SamplingOptions};
use crate::pgf::{Algorithm, SplitModel};

/// Everything needed to replay an episode from its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub protocol: Algorithm,
    pub region: Region,
    /// Relays dropped into the region per episode.
    pub n: usize,
    /// Coin (STA) or band masses (auction), one entry per group.
    pub probs: Vec<f64>,
    #[serde(default)]
    pub presplit: bool,
    #[serde(default)]
    pub sim: SimOptions,
    #[serde(default)]
    pub sampling: SamplingOptions,
}

impl BatchConfig {
    pub fn new(protocol: Algorithm, region: Region, n: usize, q: usize) -> Self {
        BatchConfig {
            protocol,
            region,
            n,
            probs: vec![1.0 / q as f64; q],
            presplit: false,
            sim: SimOptions::default(),
            sampling: SamplingOptions::default(),
        }
    }
}

/// A record plus the sorted source distances of the eligible relays.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub record: CriRecord,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub replications: usize,
    /// Empirical PMF of the CRI length, indexed by slot count.
    pub pmf: Vec<f64>,
    pub mean_slots: f64,
    pub var_slots: f64,
    pub mean_winner_distance: Option<f64>,
    /// Mean distance of the r-th nearest eligible relay (index r-1), over
    /// the episodes that had at least r eligible relays.
    pub mean_rank_distance: Vec<f64>,
    pub backoffs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub episodes: Vec<Episode>,
    pub summary: BatchSummary,
}

impl Batch {
    pub fn records(&self) -> impl Iterator<Item = &CriRecord> + '_ {
        self.episodes.iter().map(|e| &e.record)
    }
}

/// Counter-based per-episode seed (SplitMix64 of master and index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples a topology from `derive_seed(seed, 0)` and runs the protocol
/// with `derive_seed(seed, 1)`.
pub fn run_episode(config: &BatchConfig, seed: u64) -> Result<Episode> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let topology = sample_topology_with(&config.region, config.n, &config.sampling, &mut rng)?;
    let protocol_seed = derive_seed(seed, 1);
    let record = match config.protocol {
        Algorithm::Sta => {
            let model = SplitModel::new(topology.eligible_count(), config.probs.clone())?;
            run_sta(&topology, &model, protocol_seed, &config.sim)?
        }
        Algorithm::Auction | Algorithm::AuctionSkip => {
            let opts = AuctionOptions {
                band_masses: config.probs.clone(),
                skip: config.protocol == Algorithm::AuctionSkip,
                presplit: config.presplit,
            };
            run_auction(&topology, &opts, protocol_seed, &config.sim)?
        }
    };
    Ok(Episode {
        record,
        distances: topology.eligible_distances(),
    })
}

/// Independent episodes seeded by `derive_seed(master, i)`; the output does
/// not depend on how the work is scheduled across threads.
pub fn run_episode_batch(config: &BatchConfig, replications: usize, master: u64) -> Result<Batch> {
    if replications == 0 {
        return domain("replications must be at least 1");
    }
    let episodes: Vec<Episode> = (0..replications as u64)
        .into_par_iter()
        .map(|i| run_episode(config, derive_seed(master, i)))
        .collect::<Result<_>>()?;
    let summary = summarize(&episodes);
    Ok(Batch { episodes, summary })
}

fn summarize(episodes: &[Episode]) -> BatchSummary {
    let n = episodes.len() as f64;
    let max_slots = episodes.iter().map(|e| e.record.slots).max().unwrap_or(0);
    let mut pmf = vec![0.0; max_slots + 1];
    for e in episodes {
        pmf[e.record.slots] += 1.0;
    }
    pmf.iter_mut().for_each(|c| *c /= n);
    let mean_slots = episodes.iter().map(|e| e.record.slots as f64).sum::<f64>() / n;
    let var_slots = episodes
        .iter()
        .map(|e| (e.record.slots as f64 - mean_slots).powi(2))
        .sum::<f64>()
        / n;

    let winners: Vec<f64> = episodes
        .iter()
        .filter_map(|e| e.record.winner_distance)
        .collect();
    let mean_winner_distance =
        (!winners.is_empty()).then(|| winners.iter().sum::<f64>() / winners.len() as f64);

    let max_rank = episodes
        .iter()
        .map(|e| e.distances.len())
        .max()
        .unwrap_or(0);
    let mean_rank_distance = (0..max_rank)
        .map(|r| {
            let (sum, count) = episodes
                .iter()
                .filter_map(|e| e.distances.get(r))
                .fold((0.0, 0usize), |(s, c), d| (s + d, c + 1));
            sum / count as f64
        })
        .collect();

    BatchSummary {
        replications: episodes.len(),
        pmf,
        mean_slots,
        var_slots,
        mean_winner_distance,
        mean_rank_distance,
        backoffs: episodes.iter().filter(|e| e.record.backed_off).count(),
    }
}
