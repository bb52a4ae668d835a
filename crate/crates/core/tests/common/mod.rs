//! Independent oracles for the integration and acceptance suites. Nothing here
//! calls into the library's statistics or measurement code.

#![allow(dead_code)]

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Midrank of every element by direct counting, O(n^2).
pub fn brute_midranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let below = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn two_sided(stats: &[f64], observed: f64) -> f64 {
    let eps = 1e-9;
    let total = stats.len() as f64;
    let lower = stats.iter().filter(|&&s| s <= observed + eps).count() as f64 / total;
    let upper = stats.iter().filter(|&&s| s >= observed - eps).count() as f64 / total;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Exact signed-rank p by listing all 2^n sign assignments.
/// Returns `(w_plus, n_effective, p)`, or `None` if every difference is zero.
pub fn signed_rank_oracle(x: &[f64], y: &[f64]) -> Option<(f64, usize, f64)> {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if d.is_empty() {
        return None;
    }
    let ranks = brute_midranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let w: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let stats: Vec<f64> = (0u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum())
        .collect();
    Some((w, n, two_sided(&stats, w)))
}

/// Exact rank-sum p by listing every way to label `a.len()` of the pooled
/// observations as the first group. Returns `(u, p)`.
pub fn rank_sum_oracle(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = brute_midranks(&pooled);
    let n = pooled.len();
    let na = a.len();
    let offset = (na * (na + 1)) as f64 / 2.0;
    let u = ranks[..na].iter().sum::<f64>() - offset;
    let stats: Vec<f64> = (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == na)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum::<f64>() - offset)
        .collect();
    (u, two_sided(&stats, u))
}

/// Frequency of the largest FFT magnitude bin, zero-padded to 2^18 points.
pub fn fft_peak_hz(x: &[f64], sample_rate: u32) -> f64 {
    let n = (x.len().next_power_of_two()).max(1 << 18);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&s| Complex::new(s, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (bin, _) = buf[1..n / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm_sqr()))
        .fold((0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    bin as f64 * f64::from(sample_rate) / n as f64
}

/// Frequency from rising zero crossings over a contiguous tone segment.
pub fn zero_crossing_hz(segment: &[f64], sample_rate: u32) -> f64 {
    let crossings: Vec<f64> = segment
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < 0.0 && w[1] >= 0.0)
        .map(|(i, w)| i as f64 + (-w[0]) / (w[1] - w[0]))
        .collect();
    let span = crossings.last().unwrap() - crossings.first().unwrap();
    (crossings.len() - 1) as f64 * f64::from(sample_rate) / span
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|s| s * s).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn max_jump(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

pub fn peak(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, s| m.max(s.abs()))
}

/// Binomial(n, p) bounds `[lo, hi]` with at most `alpha / 2` mass in each tail.
pub fn binomial_interval(n: u64, p: f64, alpha: f64) -> (u64, u64) {
    let pmf: Vec<f64> = (0..=n)
        .map(|k| {
            let ln_choose: f64 = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum();
            (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect();
    let mut lo = 0;
    let mut tail = 0.0;
    while tail + pmf[lo as usize] <= alpha / 2.0 {
        tail += pmf[lo as usize];
        lo += 1;
    }
    let mut hi = n;
    let mut tail = 0.0;
    while tail + pmf[hi as usize] <= alpha / 2.0 {
        tail += pmf[hi as usize];
        hi -= 1;
    }
    (lo, hi)
}

#[test]
fn oracle_self_checks() {
    assert_eq!(brute_midranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
    let (w, n, p) = signed_rank_oracle(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).unwrap();
    assert_eq!((w, n), (15.0, 5));
    assert!((p - 0.0625).abs() < 1e-15);
    let (u, p) = rank_sum_oracle(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
    assert_eq!(u, 0.0);
    assert!((p - 0.1).abs() < 1e-15);
    // Binomial(24, 1/3): E = 8.
    let (lo, hi) = binomial_interval(24, 1.0 / 3.0, 0.01);
    assert!(lo < 8 && hi > 8);
}
