//! Splitting-tree (STA) CRI generating functions.
//!
//! `G_N(z) = z * sum over splits of P(split) * prod_j G_{i_j}(z)` with
//! `G_0 = G_1 = z`. The splits that put all `N` contenders into a single
//! group reproduce `G_N` on the right-hand side; they are moved to the left
//! and the resulting `1 - c z^Q` factor is divided out with a causal linear
//! recurrence, so every coefficient below `k_max` is exact.

use super::series::{accumulate_product, shift_up, TruncatedSeries};
use super::split::{binomial_coeff, binomial_pmf, SplitModel};
use crate::error::{domain, CgfError, Result};
use statrs::function::factorial::ln_binomial;

/// Largest number of group compositions enumerated for one multiplicity.
pub const COMPOSITION_LIMIT: u64 = 2_000_000;

pub fn sta_pgf_binary(model: &SplitModel, k_max: usize) -> Result<TruncatedSeries> {
    let p = model.require_binary()?;
    if k_max < 1 {
        return domain("k_max must be at least 1");
    }
    let mut table = binary_table(model.n(), p, k_max + 1);
    let g = table.swap_remove(model.n());
    Ok(TruncatedSeries::from_coeffs(g))
}

fn binary_table(n: usize, p: f64, len: usize) -> Vec<Vec<f64>> {
    let z = unit_slot(len);
    let mut g = vec![z.clone(), z];
    for m in 2..=n {
        let mut b = vec![0.0; len];
        // Pair i with m - i once and double, except the middle term.
        for i in 1..=m / 2 {
            let mut w = binomial_pmf(m, i, p);
            if i != m - i {
                w += binomial_pmf(m, m - i, p);
            }
            accumulate_product(&mut b, &g[i], &g[m - i], w);
        }
        shift_up(&mut b, 1);
        let c = binomial_pmf(m, 0, p) + binomial_pmf(m, m, p);
        divide_out(&mut b, &[(2, c)]);
        g.push(b);
    }
    g
}

pub fn sta_pgf_qary(model: &SplitModel, k_max: usize) -> Result<TruncatedSeries> {
    if k_max < 1 {
        return domain("k_max must be at least 1");
    }
    let len = k_max + 1;
    let q = model.q();
    let probs = model.probs();
    let z = unit_slot(len);
    let mut g: Vec<Vec<f64>> = vec![z.clone(), z];
    for m in 2..=model.n() {
        let count = composition_count(m, q);
        if count > COMPOSITION_LIMIT {
            return Err(CgfError::Resource(format!(
                "{count} compositions of {m} into {q} groups exceed the limit of {COMPOSITION_LIMIT}"
            )));
        }
        let mut b = vec![0.0; len];
        for_each_composition(m, q, &mut |parts| {
            if parts.contains(&m) {
                return;
            }
            let w = composition_weight(parts, probs);
            if w == 0.0 {
                return;
            }
            accumulate_group_product(&mut b, parts, &g, w);
        });
        shift_up(&mut b, 1);
        // All m in group j: z * G_m * G_0^(q-1) = z^q G_m.
        let c: f64 = probs.iter().map(|p| p.powi(m as i32)).sum();
        divide_out(&mut b, &[(q, c)]);
        g.push(b);
    }
    Ok(TruncatedSeries::from_coeffs(g.swap_remove(model.n())))
}

/// `b += w * prod_j G_{parts[j]}`; groups of size 0 or 1 only shift by a slot.
fn accumulate_group_product(b: &mut [f64], parts: &[usize], g: &[Vec<f64>], w: f64) {
    let len = b.len();
    let shift = parts.iter().filter(|&&i| i <= 1).count();
    let mut big = parts.iter().filter(|&&i| i >= 2).map(|&i| &g[i]);
    let mut prod = match big.next() {
        Some(first) => first.clone(),
        None => unit_poly(len),
    };
    for next in big {
        let mut acc = vec![0.0; len];
        accumulate_product(&mut acc, &prod, next, 1.0);
        prod = acc;
    }
    shift_up(&mut prod, shift);
    for (o, v) in b.iter_mut().zip(&prod) {
        *o += w * v;
    }
}

pub(crate) fn composition_weight(parts: &[usize], probs: &[f64]) -> f64 {
    let mut remaining: usize = parts.iter().sum();
    let mut w = 1.0;
    for (&i, &p) in parts.iter().zip(probs) {
        if i > 0 {
            if p == 0.0 {
                return 0.0;
            }
            w *= p.powi(i as i32);
        }
        w *= if remaining <= 50 {
            binomial_coeff(remaining, i)
        } else {
            ln_binomial(remaining as u64, i as u64).exp()
        };
        remaining -= i;
    }
    w
}

/// Number of ordered ways to write `m` as a sum of `q` non-negative parts.
pub(crate) fn composition_count(m: usize, q: usize) -> u64 {
    let n = (m + q - 1) as u64;
    let k = (q - 1).min(m) as u64;
    (0..k).fold(1u64, |acc, j| acc.saturating_mul(n - j) / (j + 1))
}

pub(crate) fn for_each_composition(m: usize, q: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(rest: usize, slot: usize, parts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if slot + 1 == parts.len() {
            parts[slot] = rest;
            f(parts);
            return;
        }
        for i in 0..=rest {
            parts[slot] = i;
            rec(rest - i, slot + 1, parts, f);
        }
    }
    let mut parts = vec![0; q];
    rec(m, 0, &mut parts, f);
}

/// In-place division by `1 - sum_s c_s z^s`: `a_k = b_k + sum_s c_s a_{k-s}`.
pub(crate) fn divide_out(a: &mut [f64], terms: &[(usize, f64)]) {
    for k in 0..a.len() {
        let mut v = a[k];
        for &(s, c) in terms {
            if k >= s {
                v += c * a[k - s];
            }
        }
        a[k] = v;
    }
}

/// Coefficients of `z`.
pub(crate) fn unit_slot(len: usize) -> Vec<f64> {
    let mut z = vec![0.0; len];
    if len > 1 {
        z[1] = 1.0;
    }
    z
}

fn unit_poly(len: usize) -> Vec<f64> {
    let mut one = vec![0.0; len];
    one[0] = 1.0;
    one
}
