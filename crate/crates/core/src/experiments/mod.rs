//! Reproducible experiment tables: every table pairs an analytic series with a
//! Monte Carlo series and appends agreement diagnostics.

mod config;
mod table;

pub use config::{ExperimentConfig, ExperimentId, NRange, Thresholds};
pub use table::{Diagnostic, Provenance, ResultTable};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CgfError, Result};
use crate::geometry::{expected_nth_distance, nth_neighbor_ccdf, nth_neighbor_pdf, Region};
use crate::pgf::{pgf_adaptive, Algorithm, SplitModel};
use crate::sim::{derive_seed, run_episode_batch, BatchConfig};
use crate::stats::{empirical_ccdf, ks_statistic, total_variation, MeanEstimate};

/// Runs one experiment after validating its config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let (columns, rows, diagnostics) = match config.id {
        ExperimentId::CriPmfSta => cri_pmf(config, Algorithm::Sta)?,
        ExperimentId::CriPmfAuction => cri_pmf(config, auction_variant(config))?,
        ExperimentId::DistPdfSdr => dist_pdf(config, config.sdr()?)?,
        ExperimentId::DistPdfCdr => dist_pdf(config, config.cdr()?)?,
        ExperimentId::IterGainNearest => iter_gain(config, Rank::Nearest)?,
        ExperimentId::IterGainFurthest => iter_gain(config, Rank::Furthest)?,
        ExperimentId::ExpDistNearest => exp_dist(config, Rank::Nearest)?,
        ExperimentId::ExpDistFurthest => exp_dist(config, Rank::Furthest)?,
        ExperimentId::ProgressVsCriSta => progress_vs_cri(config, Algorithm::Sta)?,
        ExperimentId::ProgressVsCriAuction => progress_vs_cri(config, auction_variant(config))?,
    };
    Ok(finish(config, config.id.name(), columns, rows, diagnostics))
}

/// Analytic-vs-simulated CRI law for every protocol over `n`: one row per
/// protocol and multiplicity with the TV distance and both means.
pub fn run_validation(
    n: NRange,
    replications: usize,
    seed: u64,
    thresholds: Thresholds,
) -> Result<ResultTable> {
    let mut config = ExperimentConfig::new(ExperimentId::CriPmfSta);
    config.n = Some(n);
    config.replications = replications;
    config.seed = seed;
    config.thresholds = thresholds;
    config.validate()?;
    let columns = cols(&[
        "protocol",
        "n",
        "tv",
        "analytic_mean",
        "empirical_mean",
        "z",
    ]);
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (code, algo) in Algorithm::ALL.into_iter().enumerate() {
        for total in n.iter() {
            let cri = simulate_cri(&config, algo, total)?;
            let mean = MeanEstimate::from_samples(&cri.slots);
            let z = mean.z_score(cri.analytic.mean());
            rows.push(vec![
                code as f64,
                total as f64,
                cri.tv,
                cri.analytic.mean(),
                mean.mean,
                z,
            ]);
            diagnostics.push(Diagnostic::at_most(
                format!("tv_{}_n{total}", algo.name()),
                cri.tv,
                thresholds.tv,
            ));
        }
    }
    let mut hashed = config.clone();
    hashed.id = ExperimentId::CriPmfSta;
    Ok(finish(&hashed, "validate", columns, rows, diagnostics))
}

type Parts = (Vec<String>, Vec<Vec<f64>>, Vec<Diagnostic>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rank {
    Nearest,
    Furthest,
}

impl Rank {
    fn of(self, total: usize) -> usize {
        match self {
            Rank::Nearest => 1,
            Rank::Furthest => total,
        }
    }
}

fn finish(
    config: &ExperimentConfig,
    name: &str,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    diagnostics: Vec<Diagnostic>,
) -> ResultTable {
    ResultTable {
        columns,
        rows,
        provenance: Provenance {
            experiment: name.to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        diagnostics,
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn auction_variant(config: &ExperimentConfig) -> Algorithm {
    if config.skip {
        Algorithm::AuctionSkip
    } else {
        Algorithm::Auction
    }
}

/// STA runs in the sector (its coin ignores geometry), auctions in the lens.
fn protocol_region(config: &ExperimentConfig, algo: Algorithm) -> Result<Region> {
    match algo {
        Algorithm::Sta => config.sdr(),
        Algorithm::Auction | Algorithm::AuctionSkip => config.cdr(),
    }
}

struct CriRun {
    analytic: crate::pgf::TruncatedSeries,
    empirical: Vec<f64>,
    slots: Vec<f64>,
    winner_distances: Vec<f64>,
    tv: f64,
}

fn simulate_cri(config: &ExperimentConfig, algo: Algorithm, total: usize) -> Result<CriRun> {
    let probs = config.probs()?;
    let analytic = pgf_adaptive(algo, &SplitModel::new(total, probs.clone())?)?;
    let mut batch_config =
        BatchConfig::new(algo, protocol_region(config, algo)?, total, probs.len());
    batch_config.probs = probs;
    let seed = derive_seed(config.seed, 1000 + total as u64);
    let batch = run_episode_batch(&batch_config, config.replications, seed)?;
    let tv = total_variation(&analytic, &batch.summary.pmf);
    Ok(CriRun {
        tv,
        slots: batch.records().map(|r| r.slots as f64).collect(),
        winner_distances: batch.records().filter_map(|r| r.winner_distance).collect(),
        empirical: batch.summary.pmf,
        analytic,
    })
}

fn cri_pmf(config: &ExperimentConfig, algo: Algorithm) -> Result<Parts> {
    let columns = cols(&["n", "k", "analytic", "empirical"]);
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for total in config.n_range().iter() {
        let run = simulate_cri(config, algo, total)?;
        let coeffs = run.analytic.coeffs();
        let cut = run
            .analytic
            .quantile_index(0.9999)
            .unwrap_or(coeffs.len() - 1);
        let last = cut
            .max(run.empirical.len().saturating_sub(1))
            .min(coeffs.len() - 1);
        for k in 1..=last {
            let emp = run.empirical.get(k).copied().unwrap_or(0.0);
            rows.push(vec![total as f64, k as f64, coeffs[k], emp]);
        }
        diagnostics.push(Diagnostic::at_most(
            format!("tv_n{total}"),
            run.tv,
            config.thresholds.tv,
        ));
    }
    Ok((columns, rows, diagnostics))
}

/// Sorted source distances of `total` uniform points per replication.
fn sample_distances(
    region: &Region,
    total: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let source = region.source();
    (0..replications as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
            let mut d = (0..total)
                .map(|_| region.sample_point(&mut rng).map(|p| p.distance(source)))
                .collect::<Result<Vec<f64>>>()?;
            d.sort_by(f64::total_cmp);
            Ok(d)
        })
        .collect()
}

fn rank_samples(samples: &[Vec<f64>], n: usize) -> Vec<f64> {
    samples.iter().map(|d| d[n - 1]).collect()
}

fn ks_against(region: &Region, n: usize, total: usize, samples: &[f64]) -> Result<f64> {
    // Validate once so the closure below cannot fail.
    nth_neighbor_ccdf(region, n, total, 0.0)?;
    let range = region.range();
    Ok(ks_statistic(samples, |d| {
        1.0 - nth_neighbor_ccdf(region, n, total, d.clamp(0.0, range)).unwrap_or(0.0)
    }))
}

/// Law of the n-th distance on a grid: pdf, ccdf, and the sample ccdf.
fn distance_rows(
    region: &Region,
    n: usize,
    total: usize,
    samples: &mut [f64],
    grid: usize,
    tag: f64,
    rows: &mut Vec<Vec<f64>>,
) -> Result<()> {
    samples.sort_by(f64::total_cmp);
    let range = region.range();
    for j in 0..=grid {
        let d = range * j as f64 / grid as f64;
        rows.push(vec![
            tag,
            n as f64,
            d,
            nth_neighbor_pdf(region, n, total, d)?,
            nth_neighbor_ccdf(region, n, total, d)?,
            empirical_ccdf(samples, d),
        ]);
    }
    Ok(())
}

fn dist_pdf(config: &ExperimentConfig, region: Region) -> Result<Parts> {
    let columns = cols(&["N", "n", "d", "pdf", "ccdf", "empirical_ccdf"]);
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    let total = config.n_range().max;
    let samples = sample_distances(
        &region,
        total,
        config.replications,
        derive_seed(config.seed, 2000 + total as u64),
    )?;
    for n in 1..=total {
        let mut ranked = rank_samples(&samples, n);
        let ks = ks_against(&region, n, total, &ranked)?;
        diagnostics.push(Diagnostic::at_most(
            format!("ks_n{n}"),
            ks,
            config.thresholds.ks,
        ));
        distance_rows(
            &region,
            n,
            total,
            &mut ranked,
            config.grid,
            total as f64,
            &mut rows,
        )?;
    }
    Ok((columns, rows, diagnostics))
}

/// The lens and its highest-priority band after each further collision.
fn cdr_rounds(config: &ExperimentConfig) -> Result<Vec<Region>> {
    let probs = config.probs()?;
    let mut rounds = vec![config.cdr()?];
    for _ in 1..config.rounds {
        let next = rounds.last().unwrap().partition_by_mass(&probs)?[0];
        rounds.push(next);
    }
    Ok(rounds)
}

/// Round 0 is the calibrated sector, rounds 1.. are nested lens bands.
fn iter_gain(config: &ExperimentConfig, rank: Rank) -> Result<Parts> {
    let columns = cols(&["round", "n", "d", "pdf", "ccdf", "empirical_ccdf"]);
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    let total = config.n_range().max;
    let n = rank.of(total);
    let mut regions = vec![config.sdr()?];
    regions.extend(cdr_rounds(config)?);
    let mut means = Vec::new();
    for (round, region) in regions.iter().enumerate() {
        let seed = derive_seed(config.seed, 3000 + round as u64);
        let mut ranked = rank_samples(
            &sample_distances(region, total, config.replications, seed)?,
            n,
        );
        let ks = ks_against(region, n, total, &ranked)?;
        diagnostics.push(Diagnostic::at_most(
            format!("ks_round{round}"),
            ks,
            config.thresholds.ks,
        ));
        distance_rows(
            region,
            n,
            total,
            &mut ranked,
            config.grid,
            round as f64,
            &mut rows,
        )?;
        means.push(expected_nth_distance(region, n, total)?);
    }
    if rank == Rank::Nearest {
        let gain = means[1..]
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if gain.is_finite() {
            diagnostics.push(Diagnostic::above("min_round_gain", gain, 0.0));
        }
    }
    Ok((columns, rows, diagnostics))
}

/// Expected n-th distance against N for the sector and every lens round.
fn exp_dist(config: &ExperimentConfig, rank: Rank) -> Result<Parts> {
    let mut regions = vec![("sdr".to_string(), config.sdr()?)];
    for (t, r) in cdr_rounds(config)?.into_iter().enumerate() {
        regions.push((format!("cdr_round{}", t + 1), r));
    }
    let mut columns = vec!["n".to_string()];
    for (name, _) in &regions {
        columns.push(format!("{name}_analytic"));
        columns.push(format!("{name}_empirical"));
    }
    let mut rows = Vec::new();
    let mut worst_z = vec![0.0_f64; regions.len()];
    for total in config.n_range().iter() {
        let n = rank.of(total);
        let mut row = vec![total as f64];
        for (j, (_, region)) in regions.iter().enumerate() {
            let analytic = expected_nth_distance(region, n, total)?;
            let seed = derive_seed(derive_seed(config.seed, 4000 + total as u64), j as u64);
            let sample = MeanEstimate::from_samples(&rank_samples(
                &sample_distances(region, total, config.replications, seed)?,
                n,
            ));
            worst_z[j] = worst_z[j].max(sample.z_score(analytic));
            row.push(analytic);
            row.push(sample.mean);
        }
        rows.push(row);
    }
    let mut diagnostics: Vec<Diagnostic> = regions
        .iter()
        .zip(&worst_z)
        .map(|((name, _), z)| Diagnostic::at_most(format!("max_z_{name}"), *z, config.thresholds.z))
        .collect();
    if rank == Rank::Nearest {
        // Columns 1, 3, 5, ... hold the analytic series.
        let round_gain = rows
            .iter()
            .flat_map(|r| (3..r.len() - 2).step_by(2).map(move |c| r[c + 2] - r[c]))
            .fold(f64::INFINITY, f64::min);
        if round_gain.is_finite() {
            diagnostics.push(Diagnostic::above("min_round_gain", round_gain, 0.0));
        }
        let n_drop = rows
            .windows(2)
            .map(|w| w[0][3] - w[1][3])
            .fold(f64::INFINITY, f64::min);
        if n_drop.is_finite() {
            diagnostics.push(Diagnostic::above("min_drop_in_n_round1", n_drop, 0.0));
        }
    }
    Ok((columns, rows, diagnostics))
}

/// Mean CRI against expected progress for increasing N.
fn progress_vs_cri(config: &ExperimentConfig, algo: Algorithm) -> Result<Parts> {
    let region = protocol_region(config, algo)?;
    let columns = cols(&[
        "n",
        "analytic_mean_cri",
        "empirical_mean_cri",
        "nearest",
        "second_furthest",
        "furthest",
        "empirical_winner_distance",
    ]);
    let mut rows = Vec::new();
    let mut z_cri = 0.0_f64;
    let mut z_winner = 0.0_f64;
    for total in config.n_range().iter() {
        let run = simulate_cri(config, algo, total)?;
        let cri = MeanEstimate::from_samples(&run.slots);
        z_cri = z_cri.max(cri.z_score(run.analytic.mean()));
        let furthest = expected_nth_distance(&region, total, total)?;
        let second = if total >= 2 {
            expected_nth_distance(&region, total - 1, total)?
        } else {
            f64::NAN
        };
        let winner = MeanEstimate::from_samples(&run.winner_distances);
        if algo == Algorithm::Sta {
            z_winner = z_winner.max(winner.z_score(furthest));
        }
        rows.push(vec![
            total as f64,
            run.analytic.mean(),
            cri.mean,
            expected_nth_distance(&region, 1, total)?,
            second,
            furthest,
            winner.mean,
        ]);
    }
    let mut diagnostics = vec![Diagnostic::at_most(
        "max_z_mean_cri",
        z_cri,
        config.thresholds.z,
    )];
    if algo == Algorithm::Sta {
        diagnostics.push(Diagnostic::at_most(
            "max_z_winner_distance",
            z_winner,
            config.thresholds.z,
        ));
    }
    Ok((columns, rows, diagnostics))
}

impl From<toml::de::Error> for CgfError {
    fn from(e: toml::de::Error) -> Self {
        CgfError::Usage(format!("bad config: {}", e.message()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: ExperimentId) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(id);
        c.replications = 2_000;
        c.grid = 10;
        c.seed = 5;
        c
    }

    #[test]
    fn every_experiment_produces_rows() {
        for id in ExperimentId::ALL {
            let mut c = small(id);
            if matches!(
                id,
                ExperimentId::ExpDistNearest
                    | ExperimentId::ExpDistFurthest
                    | ExperimentId::ProgressVsCriSta
                    | ExperimentId::ProgressVsCriAuction
            ) {
                c.n = Some(NRange::new(1, 3));
            }
            let t = run_experiment(&c).unwrap();
            assert!(!t.rows.is_empty(), "{id}");
            assert!(t.rows.iter().all(|r| r.len() == t.columns.len()), "{id}");
            assert!(!t.diagnostics.is_empty(), "{id}");
            assert_eq!(t.provenance.experiment, id.name());
        }
    }

    #[test]
    fn nearest_sector_single_relay_is_two_thirds() {
        let mut c = small(ExperimentId::ExpDistNearest);
        c.n = Some(NRange::new(1, 1));
        let t = run_experiment(&c).unwrap();
        assert!((t.column("sdr_analytic").unwrap()[0] - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn sta_pmf_rows_match_recursion() {
        let mut c = small(ExperimentId::CriPmfSta);
        c.n = Some(NRange::new(2, 2));
        let t = run_experiment(&c).unwrap();
        let at = |k: f64| t.rows.iter().find(|r| r[1] == k).unwrap()[2];
        assert!((at(3.0) - 0.5).abs() < 1e-12);
        assert!((at(5.0) - 0.25).abs() < 1e-12);
        assert!((at(7.0) - 0.125).abs() < 1e-12);
        assert_eq!(at(4.0), 0.0);
    }

    #[test]
    fn same_config_same_table() {
        let c = small(ExperimentId::DistPdfCdr);
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }
}
