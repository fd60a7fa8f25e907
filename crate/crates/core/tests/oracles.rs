//! Monte Carlo oracles for the analytic laws.

use cgf_core::geometry::{
    expected_nth_distance, nth_neighbor_ccdf, sample_topology, LensRegion, Point2, Region,
    SectorRegion,
};
use cgf_core::pgf::{pgf_adaptive, Algorithm, SplitModel};
use cgf_core::sim::{run_episode_batch, run_sta_observed, BatchConfig, SimOptions, SlotFeedback};
use cgf_core::stats::{ks_statistic, total_variation, MeanEstimate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lens(rho: f64) -> Region {
    Region::Lens(LensRegion::toward(Point2::ORIGIN, Point2::new(2.0, 0.0), 1.0, rho).unwrap())
}

fn sector(aperture: f64) -> Region {
    Region::Sector(SectorRegion::new(Point2::ORIGIN, 1.0, 0.0, aperture).unwrap())
}

/// Hit-or-miss estimate of the fraction of the bounding square [-1,1]^2
/// satisfying `hit`, with its standard error.
fn hit_or_miss(samples: usize, seed: u64, hit: impl Fn(Point2) -> bool) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| {
            hit(Point2::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ))
        })
        .count();
    let f = hits as f64 / samples as f64;
    (f, (f * (1.0 - f) / samples as f64).sqrt())
}

#[test]
fn wide_lens_area_by_hit_or_miss() {
    let region = lens(2.0);
    let (f, se) = hit_or_miss(10_000_000, 11, |p| region.contains(p));
    assert!(
        (4.0 * f - region.area()).abs() <= 3.0 * 4.0 * se,
        "{} vs {}",
        4.0 * f,
        region.area()
    );
}

#[test]
fn lens_radial_mass_by_hit_or_miss() {
    let region = lens(1.0);
    let (inside, _) = hit_or_miss(10_000_000, 12, |p| region.contains(p));
    let (near, _) = hit_or_miss(10_000_000, 12, |p| region.contains(p) && p.norm() <= 0.8);
    let est = near / inside;
    let n_eff = inside * 1e7;
    let se = (est * (1.0 - est) / n_eff).sqrt();
    let want = region.radial_mass(0.8).unwrap();
    assert!((est - want).abs() <= 3.0 * se, "{est} vs {want}");
}

#[test]
fn band_membership_matches_mass() {
    let region = lens(1.0);
    let bands = region.partition(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let draws = 1_000_000;
    let first = (0..draws)
        .filter(|_| bands[0].contains(region.sample_point(&mut rng).unwrap()))
        .count();
    let f = first as f64 / draws as f64;
    assert!((f - 0.5).abs() <= 3.0 * (0.25 / draws as f64).sqrt(), "{f}");
}

#[test]
fn sub_band_counts_are_binomial() {
    let region = lens(1.0);
    let band = region.partition(2).unwrap()[0].partition(2).unwrap()[0];
    let counts: Vec<f64> = (0..100_000)
        .map(|s| {
            sample_topology(&region, 5, s)
                .unwrap()
                .relays
                .iter()
                .filter(|r| band.contains(r.position))
                .count() as f64
        })
        .collect();
    let est = MeanEstimate::from_samples(&counts);
    assert!(est.z_score(5.0 * 0.25) <= 3.0, "{est:?}");
}

fn nth_samples(region: &Region, total: usize, draws: u64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let mut d: Vec<f64> = (0..total)
                .map(|_| region.sample_point(&mut rng).unwrap().norm())
                .collect();
            d.sort_by(f64::total_cmp);
            d
        })
        .collect()
}

#[test]
fn distance_laws_pass_ks() {
    for (region, seed) in [(lens(1.0), 21), (sector(2.0), 22)] {
        let samples = nth_samples(&region, 5, 100_000, seed);
        for n in 1..=5 {
            let col: Vec<f64> = samples.iter().map(|d| d[n - 1]).collect();
            let ks = ks_statistic(&col, |d| {
                1.0 - nth_neighbor_ccdf(&region, n, 5, d.min(1.0)).unwrap()
            });
            assert!(ks <= 0.01, "n = {n}: KS {ks}");
        }
    }
}

#[test]
fn furthest_of_five_in_lens_mean() {
    let region = lens(1.0);
    let col: Vec<f64> = nth_samples(&region, 5, 200_000, 23)
        .iter()
        .map(|d| d[4])
        .collect();
    let est = MeanEstimate::from_samples(&col);
    assert!(
        est.z_score(expected_nth_distance(&region, 5, 5).unwrap()) <= 3.0,
        "{est:?}"
    );
}

fn batch(
    protocol: Algorithm,
    region: Region,
    n: usize,
    q: usize,
    reps: usize,
    seed: u64,
) -> cgf_core::sim::Batch {
    run_episode_batch(&BatchConfig::new(protocol, region, n, q), reps, seed).unwrap()
}

#[test]
fn sta_two_contenders_resolve_in_three_slots_half_the_time() {
    let b = batch(Algorithm::Sta, sector(1.0), 2, 2, 100_000, 31);
    assert!(
        (b.summary.pmf[3] - 0.5).abs() <= 0.005,
        "{}",
        b.summary.pmf[3]
    );
}

#[test]
fn sta_means_within_three_sigma() {
    for (n, q, seed) in [(4, 2, 32), (2, 3, 33), (3, 3, 34)] {
        let b = batch(Algorithm::Sta, sector(1.0), n, q, 100_000, seed);
        let slots: Vec<f64> = b.records().map(|r| r.slots as f64).collect();
        let analytic = pgf_adaptive(Algorithm::Sta, &SplitModel::fair(n, q).unwrap())
            .unwrap()
            .mean();
        let est = MeanEstimate::from_samples(&slots);
        assert!(
            est.z_score(analytic) <= 3.0,
            "N={n} q={q}: {est:?} vs {analytic}"
        );
    }
}

#[test]
fn auction_pmf_total_variation() {
    for algo in [Algorithm::Auction, Algorithm::AuctionSkip] {
        let b = batch(algo, lens(1.0), 4, 2, 100_000, 35);
        let analytic = pgf_adaptive(algo, &SplitModel::fair(4, 2).unwrap()).unwrap();
        let tv = total_variation(&analytic, &b.summary.pmf);
        assert!(tv <= 0.01, "{algo}: TV {tv}");
    }
}

#[test]
fn sta_winner_distance_follows_the_furthest_law() {
    let region = lens(1.0);
    let b = batch(Algorithm::Sta, region, 5, 2, 100_000, 36);
    let winners: Vec<f64> = b.records().map(|r| r.winner_distance.unwrap()).collect();
    let ks = ks_statistic(&winners, |d| {
        1.0 - nth_neighbor_ccdf(&region, 5, 5, d.min(1.0)).unwrap()
    });
    assert!(ks <= 0.01, "KS {ks}");
}

#[test]
fn sta_blocked_access_and_completeness() {
    let region = lens(1.0);
    for seed in 0..500 {
        let topo = sample_topology(&region, 6, seed).unwrap();
        let model = SplitModel::fair(6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut singles = Vec::new();
        let rec = run_sta_observed(&topo, &model, &mut rng, &SimOptions::default(), &mut |ev| {
            assert!(ev.transmitters.iter().all(|&id| id < 6));
            if ev.feedback == SlotFeedback::Single {
                singles.push(ev.transmitters[0]);
            }
        })
        .unwrap();
        singles.sort();
        assert_eq!(singles, (0..6).collect::<Vec<_>>());
        assert_eq!(rec.slots, rec.trace.len());
    }
}
