//! Exact expectations over random vertex subsets, by enumeration.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::bits::{binomial, k_subsets};
use crate::error::{Error, Result};
use crate::scalar::Rational;

use super::{mask_of, GraphInstance};

/// Largest ground set enumerated by the oracles.
pub const MAX_ORACLE_N: usize = 12;

fn cap(what: &'static str, value: usize, max: usize) -> Result<()> {
    if value > max {
        return Err(Error::SizeCap { what, value, cap: max });
    }
    Ok(())
}

fn subset_masks(n: usize, k: usize) -> Vec<u64> {
    k_subsets(n, k).iter().map(|s| mask_of(s)).collect()
}

fn frac(num: u128, den: u128) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn check_size(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParameters(format!(
            "subset size {k} exceeds ground set size {n}"
        )));
    }
    Ok(())
}

/// `Exp_{X,w} |Δ(X,B,w)|` over all `x`-subsets `X ⊆ V` and all `w ∈ V`,
/// counting ordered pairs `(u,v) ∈ B²` (diagonal included).
pub fn oracle_delta(g: &GraphInstance, b: &[usize], x: usize) -> Result<Rational> {
    let n = g.n();
    cap("vertices", n, 10)?;
    check_size(n, x)?;
    let bm = mask_of(b);
    let xs = subset_masks(n, x);
    let count: u128 = xs
        .par_iter()
        .map(|&xm| {
            let mut c = 0u128;
            for w in 0..n {
                let nb = g.neighbors(w) & bm;
                for u in (0..n).filter(|&u| nb >> u & 1 == 1) {
                    for v in (0..n).filter(|&v| nb >> v & 1 == 1) {
                        if g.common(u, v) & xm == 0 {
                            c += 1;
                        }
                    }
                }
            }
            c
        })
        .sum();
    Ok(frac(count, xs.len() as u128 * n as u128))
}

/// For every ordered pair `(u,v)`, the number of `(X, w)` with `|X| = x`
/// such that `(u,v) ∈ Δ(X,V,w)`; row-major `n × n`.
///
/// Summing the entries over `B²` gives the numerator of
/// [`oracle_delta`] for any `B`, with denominator `C(n,x)·n`.
pub fn delta_pair_counts(g: &GraphInstance, x: usize) -> Vec<u64> {
    let n = g.n();
    let xs = subset_masks(n, x);
    let mut out = vec![0u64; n * n];
    for u in 0..n {
        for v in 0..n {
            let c = g.common(u, v);
            let t = c.count_ones() as u64;
            out[u * n + v] = xs.iter().filter(|&&xm| c & xm == 0).count() as u64 * t;
        }
    }
    out
}

/// `Exp_X |N ∩ X|` over the `x`-subsets `X` of a ground set of size `v1`.
pub fn oracle_ninter(v1: usize, nset: &[usize], x: usize) -> Result<Rational> {
    moment(v1, nset, x, 1)
}

/// `Exp_X |N ∩ X|²` over the `x`-subsets `X` of a ground set of size `v1`.
pub fn oracle_ninter_sq(v1: usize, nset: &[usize], x: usize) -> Result<Rational> {
    moment(v1, nset, x, 2)
}

fn moment(v1: usize, nset: &[usize], x: usize, power: u32) -> Result<Rational> {
    cap("ground set", v1, MAX_ORACLE_N)?;
    check_size(v1, x)?;
    if let Some(&i) = nset.iter().find(|&&i| i >= v1) {
        return Err(Error::IndexOutOfRange { index: i, n: v1 });
    }
    let nm = mask_of(nset);
    let xs = subset_masks(v1, x);
    let total: u128 = xs.iter().map(|&xm| ((nm & xm).count_ones() as u128).pow(power)).sum();
    Ok(frac(total, xs.len() as u128))
}

/// `Exp_{X,Y} |E(X,Y)|` over independent `x`- and `y`-subsets of `V`,
/// where `E(X,Y)` is the set of ordered pairs `(u,v) ∈ X × Y` with `uv ∈ E`.
pub fn oracle_edge_exp(g: &GraphInstance, x: usize, y: usize) -> Result<Rational> {
    let n = g.n();
    cap("vertices", n, MAX_ORACLE_N)?;
    check_size(n, x)?;
    check_size(n, y)?;
    let xs = subset_masks(n, x);
    let ys = subset_masks(n, y);
    let total: u128 = xs
        .par_iter()
        .map(|&xm| {
            ys.iter()
                .map(|&ym| {
                    (0..n)
                        .filter(|&u| xm >> u & 1 == 1)
                        .map(|u| (g.neighbors(u) & ym).count_ones() as u128)
                        .sum::<u128>()
                })
                .sum::<u128>()
        })
        .sum();
    Ok(frac(total, binomial(n, x) * binomial(n, y)))
}
