//! Wilcoxon signed-rank and rank-sum tests.
//!
//! Ties get midranks. Internally ranks are doubled so every midrank is an
//! integer and the exact null distributions can be counted with dynamic
//! programming over integer rank sums. Two-sided exact p-values are
//! `min(1, 2 * min(P[T <= t], P[T >= t]))`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::AnalysisError;

/// Largest effective sample size for which the signed-rank test is exact.
pub const SIGNED_RANK_EXACT_MAX_N: usize = 25;
/// Largest combined sample size for which the rank-sum test is exact.
pub const RANK_SUM_EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// W+ for the signed-rank test, U of the first sample for rank-sum.
    pub statistic: f64,
    pub n_effective: usize,
    pub p_two_sided: f64,
    pub method: TestMethod,
}

/// Doubled midranks of `values` (1-based ranks times two).
pub(crate) fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j hold ranks i+1..=j+1; doubled midrank is their sum.
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

/// `sum(t^3 - t)` over tie groups of `values`.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        total += t * t * t - t;
        i = j + 1;
    }
    total
}

fn two_sided_from_counts(counts: &[f64], observed: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=observed].iter().sum::<f64>() / total;
    let upper: f64 = counts[observed..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_two_sided(deviation: f64, variance: f64) -> f64 {
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((deviation.abs() - 0.5).max(0.0)) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

fn check_finite(xs: &[f64]) -> Result<(), AnalysisError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AnalysisError::NonFinite)
    }
}

/// Paired test of `x` against `y`. Zero differences are dropped.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    check_finite(x)?;
    check_finite(y)?;
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(AnalysisError::AllZeroDifferences);
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_midranks(&magnitudes);
    let w_plus2: u64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let statistic = w_plus2 as f64 / 2.0;

    if n <= SIGNED_RANK_EXACT_MAX_N {
        let max: u64 = ranks.iter().sum();
        let mut counts = vec![0.0f64; max as usize + 1];
        counts[0] = 1.0;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                let c = counts[s];
                if c != 0.0 {
                    counts[s + r] += c;
                }
            }
            reach += r;
        }
        Ok(WilcoxonResult {
            statistic,
            n_effective: n,
            p_two_sided: two_sided_from_counts(&counts, w_plus2 as usize),
            method: TestMethod::Exact,
        })
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&magnitudes) / 48.0;
        Ok(WilcoxonResult {
            statistic,
            n_effective: n,
            p_two_sided: normal_two_sided(statistic - mean, variance),
            method: TestMethod::NormalApprox,
        })
    }
}

/// Unpaired test of `a` against `b`; the statistic is the Mann-Whitney U
/// of `a`.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::EmptyGroup);
    }
    check_finite(a)?;
    check_finite(b)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let ra2: u64 = ranks[..na].iter().sum();
    let u = ra2 as f64 / 2.0 - (na * (na + 1)) as f64 / 2.0;

    if n <= RANK_SUM_EXACT_MAX_N {
        // counts[k][s]: labelings putting k items in `a` with doubled rank sum s.
        let max: u64 = ranks.iter().sum();
        let mut counts = vec![vec![0.0f64; max as usize + 1]; na + 1];
        counts[0][0] = 1.0;
        for &r in &ranks {
            let r = r as usize;
            for k in (1..=na).rev() {
                let (lo, hi) = counts.split_at_mut(k);
                for (s, c) in lo[k - 1].iter().enumerate() {
                    if *c != 0.0 && s + r < hi[0].len() {
                        hi[0][s + r] += c;
                    }
                }
            }
        }
        Ok(WilcoxonResult {
            statistic: u,
            n_effective: n,
            p_two_sided: two_sided_from_counts(&counts[na], ra2 as usize),
            method: TestMethod::Exact,
        })
    } else {
        let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
        let mean = naf * nbf / 2.0;
        let variance = naf * nbf / 12.0 * ((nf + 1.0) - tie_term(&pooled) / (nf * (nf - 1.0)));
        Ok(WilcoxonResult {
            statistic: u,
            n_effective: n,
            p_two_sided: normal_two_sided(u - mean, variance),
            method: TestMethod::NormalApprox,
        })
    }
}
