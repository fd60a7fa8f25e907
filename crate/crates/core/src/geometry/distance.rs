//! Distance from the source to its n-th nearest neighbour when `N` points
//! are dropped uniformly into a region (binomial point process).

use super::region::{bisect, Region};
use crate::error::{domain, Result};
use crate::pgf::binomial_pmf;

/// Absolute tolerance of [`expected_nth_distance`].
pub const EXPECTATION_TOL: f64 = 1e-8;

fn check_rank(n: usize, total: usize) -> Result<()> {
    if n == 0 || n > total {
        return domain(format!("rank {n} outside 1..={total}"));
    }
    Ok(())
}

/// `P(D_n > d)`: fewer than `n` of the `total` points fall within `d`.
pub fn nth_neighbor_ccdf(region: &Region, n: usize, total: usize, d: f64) -> Result<f64> {
    check_rank(n, total)?;
    let p = region.radial_mass(d)?;
    Ok(ccdf_from_mass(p, n, total))
}

pub(crate) fn ccdf_from_mass(p: f64, n: usize, total: usize) -> f64 {
    (0..n)
        .map(|k| binomial_pmf(total, k, p))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Density of `D_n`: `N * C(N-1, n-1) p^(n-1) (1-p)^(N-n) * dp/dd`.
pub fn nth_neighbor_pdf(region: &Region, n: usize, total: usize, d: f64) -> Result<f64> {
    check_rank(n, total)?;
    let p = region.radial_mass(d)?;
    let dp = region.radial_density(d)?;
    Ok(total as f64 * binomial_pmf(total - 1, n - 1, p) * dp)
}

/// `E[D_n] = ∫_0^R P(D_n > d) dd`, integrated piecewise between the
/// region's radial breakpoints.
pub fn expected_nth_distance(region: &Region, n: usize, total: usize) -> Result<f64> {
    check_rank(n, total)?;
    let f = |d: f64| ccdf_from_mass(region.radial_mass_unchecked(d), n, total);
    Ok(integrate_piecewise(region, f, EXPECTATION_TOL))
}

/// Total mass of [`nth_neighbor_pdf`] over `[0, R]`; 1 up to quadrature error.
pub fn nth_neighbor_pdf_mass(region: &Region, n: usize, total: usize) -> Result<f64> {
    check_rank(n, total)?;
    let f = |d: f64| {
        total as f64
            * binomial_pmf(total - 1, n - 1, region.radial_mass_unchecked(d))
            * region.radial_density(d).unwrap_or(0.0)
    };
    Ok(integrate_piecewise(region, f, 1e-10))
}

/// Distance `d` with `P(D_n <= d) = level`.
pub fn nth_neighbor_quantile(region: &Region, n: usize, total: usize, level: f64) -> Result<f64> {
    check_rank(n, total)?;
    if !(0.0..=1.0).contains(&level) {
        return domain(format!("quantile level {level} outside [0, 1]"));
    }
    let cdf = |d: f64| 1.0 - ccdf_from_mass(region.radial_mass_unchecked(d), n, total);
    Ok(bisect(0.0, region.range(), level, cdf))
}

/// Integral of `f` over `[0, R]` split at the region's breakpoints.
pub(crate) fn integrate_piecewise(region: &Region, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let pts = region.radial_breakpoints();
    let pieces = (pts.len() - 1).max(1) as f64;
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| quadrature::integrate(&f, w[0], w[1], tol / pieces).integral)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LensRegion, Point2, SectorRegion};
    use std::f64::consts::PI;

    fn half_disk() -> Region {
        Region::Sector(SectorRegion::new(Point2::ORIGIN, 1.0, 0.0, PI).unwrap())
    }

    #[test]
    fn ccdf_vanishes_at_range() {
        for n in 1..=5 {
            assert!(nth_neighbor_ccdf(&half_disk(), n, 5, 1.0).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn nearest_of_five_closed_form() {
        let r = half_disk();
        for &d in &[0.1f64, 0.35, 0.7] {
            let expected = (1.0 - d * d).powi(5);
            assert!((nth_neighbor_ccdf(&r, 1, 5, d).unwrap() - expected).abs() < 1e-14);
        }
        let median = nth_neighbor_quantile(&r, 1, 5, 0.5).unwrap();
        assert!((median - (1.0 - 2f64.powf(-0.2)).sqrt()).abs() < 1e-9);
        assert!((median - 0.35982).abs() < 1e-4);
        assert!((nth_neighbor_ccdf(&r, 1, 1, 0.4).unwrap() - 0.84).abs() < 1e-15);
    }

    #[test]
    fn pdf_closed_forms() {
        let r = half_disk();
        for &d in &[0.2, 0.5, 0.9] {
            assert!((nth_neighbor_pdf(&r, 1, 1, d).unwrap() - 2.0 * d).abs() < 1e-14);
            assert!((nth_neighbor_pdf(&r, 5, 5, d).unwrap() - 10.0 * d.powi(9)).abs() < 1e-13);
        }
    }

    #[test]
    fn expected_single_point_distance() {
        assert!((expected_nth_distance(&half_disk(), 1, 1).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        let mut prev = f64::INFINITY;
        for total in 1..=20 {
            let e = expected_nth_distance(&half_disk(), 1, total).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn lens_pdf_matches_central_difference() {
        let lens = Region::Lens(
            LensRegion::toward(Point2::ORIGIN, Point2::new(1.0, 0.0), 1.0, 1.0).unwrap(),
        );
        let h = 1e-5;
        for n in 1..=5 {
            for i in 1..20 {
                let d = i as f64 / 20.0;
                let fd = -(nth_neighbor_ccdf(&lens, n, 5, d + h).unwrap()
                    - nth_neighbor_ccdf(&lens, n, 5, d - h).unwrap())
                    / (2.0 * h);
                let exact = nth_neighbor_pdf(&lens, n, 5, d).unwrap();
                assert!((fd - exact).abs() < 1e-6, "n={n} d={d}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn rank_checks() {
        assert!(nth_neighbor_ccdf(&half_disk(), 6, 5, 0.5).is_err());
        assert!(nth_neighbor_ccdf(&half_disk(), 0, 5, 0.5).is_err());
        assert!(nth_neighbor_pdf(&half_disk(), 1, 5, 1.2).is_err());
    }
}
