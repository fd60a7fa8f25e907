//! Auction (Dutch descent with tree pruning) CRI generating functions.
//!
//! After the initial collision the first band answers. One reply ends the
//! auction (`z^2 B_{N,1}`), a collision among `i >= 2` prunes the other band
//! and recurses on the colliders only (`z B_{N,i} G_i`), and an idle first
//! band hands the whole set to the second band. Without the skip
//! refinement that hand-over costs an idle slot plus a fresh collision
//! (`z^2 B_{N,0} G_N`); with it the idle slot alone suffices
//! (`z B_{N,0} G_N`).

use super::series::{shift_up, TruncatedSeries};
use super::split::{binomial_pmf, SplitModel};
use super::tree::{divide_out, unit_slot};
use crate::error::{domain, Result};

pub fn auction_pgf(model: &SplitModel, k_max: usize) -> Result<TruncatedSeries> {
    build(model, k_max, false)
}

pub fn auction_skip_pgf(model: &SplitModel, k_max: usize) -> Result<TruncatedSeries> {
    build(model, k_max, true)
}

fn build(model: &SplitModel, k_max: usize, skip: bool) -> Result<TruncatedSeries> {
    let p = model.require_binary()?;
    if k_max < 1 {
        return domain("k_max must be at least 1");
    }
    let len = k_max + 1;
    let z = unit_slot(len);
    let mut g = vec![z.clone(), z];
    for m in 2..=model.n() {
        let mut b = vec![0.0; len];
        for (i, gi) in g.iter().enumerate().take(m).skip(2) {
            let w = binomial_pmf(m, i, p);
            for (o, v) in b.iter_mut().zip(gi) {
                *o += w * v;
            }
        }
        shift_up(&mut b, 1);
        if len > 2 {
            b[2] += binomial_pmf(m, 1, p);
        }
        let idle = binomial_pmf(m, 0, p);
        let all_first = binomial_pmf(m, m, p);
        if skip {
            divide_out(&mut b, &[(1, idle + all_first)]);
        } else {
            divide_out(&mut b, &[(2, idle), (1, all_first)]);
        }
        g.push(b);
    }
    Ok(TruncatedSeries::from_coeffs(g.swap_remove(model.n())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fair(n: usize) -> SplitModel {
        SplitModel::binary(n, 0.5).unwrap()
    }

    #[test]
    fn two_contenders_rational_expansion() {
        // (z^2/2) / (1 - z/4 - z^2/4)
        let g = auction_pgf(&fair(2), 60).unwrap();
        assert_eq!(g.coeff(0), 0.0);
        assert_eq!(g.coeff(1), 0.0);
        assert_eq!(g.coeff(2), 0.5);
        assert_eq!(g.coeff(3), 0.125);
        assert_eq!(g.coeff(4), 5.0 / 32.0);
        let mut a = vec![0.0; 61];
        a[2] = 0.5;
        for k in 3..=60 {
            a[k] = 0.25 * a[k - 1] + 0.25 * a[k - 2];
        }
        for k in 0..=60 {
            assert!((g.coeff(k) - a[k]).abs() < 1e-16);
        }
        assert!((g.mean() - 3.5).abs() < 1e-9);
    }

    #[test]
    fn skip_two_contenders_is_geometric() {
        let g = auction_skip_pgf(&fair(2), 60).unwrap();
        assert_eq!(g.coeff(0), 0.0);
        assert_eq!(g.coeff(1), 0.0);
        for k in 2..=60 {
            assert_eq!(g.coeff(k), 0.5f64.powi(k as i32 - 1));
        }
        assert!((g.mean() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_multiplicities_are_one_slot() {
        for n in [0, 1] {
            assert_eq!(
                auction_pgf(&fair(n), 4).unwrap().coeffs(),
                &[0.0, 1.0, 0.0, 0.0, 0.0]
            );
            assert_eq!(
                auction_skip_pgf(&fair(n), 4).unwrap().coeffs(),
                &[0.0, 1.0, 0.0, 0.0, 0.0]
            );
        }
    }

    #[test]
    fn requires_binary_split() {
        assert!(auction_pgf(&SplitModel::fair(3, 3).unwrap(), 10).is_err());
    }
}
