use approx::assert_abs_diff_eq;
use cgf_core::geometry::{calibrate_sdr, nth_neighbor_pdf, LensRegion, Point2, Region};
use cgf_core::pgf::{
    invert_fourier, pgf, pgf_adaptive, pgf_at, sta_pgf_qary, Algorithm, InversionParams, SplitModel,
};
use proptest::prelude::*;

fn algorithm() -> impl Strategy<Value = Algorithm> {
    prop_oneof![
        Just(Algorithm::Sta),
        Just(Algorithm::Auction),
        Just(Algorithm::AuctionSkip)
    ]
}

fn lens(rho: f64) -> Region {
    Region::Lens(LensRegion::toward(Point2::ORIGIN, Point2::new(2.0, 0.0), 1.0, rho).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adaptive_pgfs_are_normalized(algo in algorithm(), n in 0usize..=25, p in 0.1f64..0.9) {
        let s = pgf_adaptive(algo, &SplitModel::binary(n, p).unwrap()).unwrap();
        prop_assert!((s.total() - 1.0).abs() < 1e-9);
        prop_assert!(s.coeffs().iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn tree_lengths_are_one_mod_q(n in 1usize..=6, q in 2usize..=4) {
        let s = sta_pgf_qary(&SplitModel::fair(n, q).unwrap(), 80).unwrap();
        for (k, c) in s.coeffs().iter().enumerate() {
            if k % q != 1 % q || (q == 2 && k % 2 == 0) {
                prop_assert!(*c == 0.0, "mass {c} at k = {k}, q = {q}");
            }
        }
        prop_assert!(s.total() > 0.95);
    }

    #[test]
    fn auction_support_starts_at_two(n in 2usize..=15, p in 0.1f64..0.9, skip in any::<bool>()) {
        let algo = if skip { Algorithm::AuctionSkip } else { Algorithm::Auction };
        let s = pgf(algo, &SplitModel::binary(n, p).unwrap(), 64).unwrap();
        prop_assert!(s.coeff(0) == 0.0 && s.coeff(1) == 0.0 && s.coeff(2) > 0.0);
    }

    #[test]
    fn pruning_never_lengthens_the_mean(n in 2usize..=12, p in 0.15f64..0.85) {
        let model = SplitModel::binary(n, p).unwrap();
        let mean = |a| pgf_adaptive(a, &model).unwrap().moments().unwrap().mean;
        let (sta, auc, skip) = (mean(Algorithm::Sta), mean(Algorithm::Auction), mean(Algorithm::AuctionSkip));
        prop_assert!(skip <= auc + 1e-12 && auc <= sta + 1e-12, "{skip} {auc} {sta}");
    }

    #[test]
    fn inversion_matches_both_routes(algo in algorithm(), n in 0usize..=8, k in 1usize..=30) {
        let model = SplitModel::fair(n, 2).unwrap();
        let series = pgf(algo, &model, 200).unwrap();
        let params = InversionParams::default();
        let direct = invert_fourier(|z| pgf_at(algo, &model, z).unwrap(), k, &params).unwrap();
        let via_series = invert_fourier(|z| series.evaluate(z), k, &params).unwrap();
        prop_assert!((direct.raw - series.coeff(k)).abs() <= 1e-6);
        prop_assert!((via_series.raw - series.coeff(k)).abs() <= 1e-6);
    }

    #[test]
    fn radial_mass_is_monotone(rho in 0.1f64..=2.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let region = lens(rho);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(region.radial_mass(lo).unwrap() <= region.radial_mass(hi).unwrap() + 1e-12);
        prop_assert!((region.radial_mass(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_preserves_area(rho in 0.01f64..=2.0) {
        let l = match lens(rho) { Region::Lens(l) => l, _ => unreachable!() };
        let s = calibrate_sdr(&l).unwrap();
        prop_assert!((s.area() - l.area()).abs() < 1e-12);
    }

    #[test]
    fn bands_split_mass_evenly(rho in 0.3f64..=2.0, q in 2usize..=4) {
        let region = lens(rho);
        let bands = region.partition(q).unwrap();
        for b in &bands {
            prop_assert!((b.area() / region.area() - 1.0 / q as f64).abs() < 1e-9);
        }
        let sub = bands[0].partition(q).unwrap();
        prop_assert!((sub[0].area() / region.area() - 1.0 / (q * q) as f64).abs() < 1e-9);
    }

    #[test]
    fn pdf_integrates_to_one(rho in 0.2f64..=2.0, (total, rank) in (1usize..=6).prop_flat_map(|t| (Just(t), 1..=t))) {
        let region = lens(rho);
        let mut cuts = region.radial_breakpoints();
        cuts.retain(|&c| c > 0.0 && c < 1.0);
        cuts.insert(0, 0.0);
        cuts.push(1.0);
        let integral: f64 = cuts
            .windows(2)
            .map(|w| {
                quadrature::integrate(|d| nth_neighbor_pdf(&region, rank, total, d).unwrap(), w[0], w[1], 1e-11).integral
            })
            .sum();
        prop_assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }
}

#[test]
fn sector_pdf_closed_forms() {
    let sector = Region::Sector(
        cgf_core::geometry::SectorRegion::new(Point2::ORIGIN, 1.0, 0.0, 1.0).unwrap(),
    );
    for d in [0.1, 0.5, 0.9] {
        assert_abs_diff_eq!(
            nth_neighbor_pdf(&sector, 1, 1, d).unwrap(),
            2.0 * d,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            nth_neighbor_pdf(&sector, 5, 5, d).unwrap(),
            10.0 * d.powi(9),
            epsilon = 1e-12
        );
    }
}
