//! Mono source tones.

use std::f64::consts::{PI, TAU};

use super::SourceKind;
use crate::rng::SplitMix64;

const NOISE_SEED: u64 = 0x005E_ED0F_A21A_0001;
const NOISE_CUTOFF_HZ: f64 = 1500.0;
const NOISE_TAPS: usize = 63;

/// Raised-cosine onset and offset over `ramp` frames, in place.
pub fn apply_ramps(tone: &mut [f64], ramp: usize) {
    let n = tone.len();
    let ramp = ramp.min(n / 2);
    for i in 0..ramp {
        let w = 0.5 * (1.0 - (PI * i as f64 / ramp as f64).cos());
        tone[i] *= w;
        tone[n - 1 - i] *= w;
    }
}

fn normalize_peak(tone: &mut [f64]) {
    let peak = tone.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        tone.iter_mut().for_each(|s| *s /= peak);
    }
}

pub fn sine(freq_hz: f64, frames: usize, sample_rate: u32) -> Vec<f64> {
    let w = TAU * freq_hz / f64::from(sample_rate);
    (0..frames).map(|n| (w * n as f64).sin()).collect()
}

/// Cosine-phase harmonic complex with `1/k` partial amplitudes. Partials
/// at or above Nyquist are dropped.
pub fn harmonic_complex(fundamental_hz: f64, harmonics: u32, frames: usize, sample_rate: u32) -> Vec<f64> {
    let nyquist = f64::from(sample_rate) / 2.0;
    let w = TAU * fundamental_hz / f64::from(sample_rate);
    let partials: Vec<f64> = (1..=harmonics)
        .map(f64::from)
        .filter(|k| k * fundamental_hz < nyquist)
        .collect();
    (0..frames)
        .map(|n| {
            let phase = w * n as f64;
            partials.iter().map(|k| (k * phase).cos() / k).sum()
        })
        .collect()
}

/// Gaussian noise low-passed at 1.5 kHz. The generator seed is fixed so
/// every burst is identical and direction stays the only varying cue.
pub fn noise_burst(frames: usize, sample_rate: u32) -> Vec<f64> {
    let mut rng = SplitMix64::new(NOISE_SEED);
    let half = NOISE_TAPS / 2;
    let white: Vec<f64> = (0..frames + NOISE_TAPS).map(|_| rng.next_gaussian()).collect();
    let fc = NOISE_CUTOFF_HZ / f64::from(sample_rate);
    let taps: Vec<f64> = (0..NOISE_TAPS)
        .map(|i| {
            let t = i as f64 - half as f64;
            let sinc = if t == 0.0 { 2.0 * fc } else { (TAU * fc * t).sin() / (PI * t) };
            sinc * blackman(t, NOISE_TAPS as f64 + 1.0)
        })
        .collect();
    (0..frames)
        .map(|n| taps.iter().zip(&white[n..]).map(|(h, x)| h * x).sum())
        .collect()
}

/// Blackman window evaluated at offset `t` from the centre of a window of
/// total width `width`.
pub(crate) fn blackman(t: f64, width: f64) -> f64 {
    let x = TAU * t / width;
    0.42 + 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
}

/// One ramped tone with unit peak.
pub fn tone(kind: SourceKind, freq_hz: f64, harmonics: u32, frames: usize, ramp: usize, sample_rate: u32) -> Vec<f64> {
    let mut out = match kind {
        SourceKind::Sine => sine(freq_hz, frames, sample_rate),
        SourceKind::HarmonicComplex => harmonic_complex(freq_hz, harmonics, frames, sample_rate),
        SourceKind::NoiseBurst => noise_burst(frames, sample_rate),
    };
    normalize_peak(&mut out);
    apply_ramps(&mut out, ramp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramps_start_and_end_at_zero() {
        let mut t = vec![1.0; 1000];
        apply_ramps(&mut t, 100);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[999], 0.0);
        assert!((t[50] - 0.5).abs() < 1e-12);
        assert_eq!(t[500], 1.0);
        assert!(t.windows(2).take(100).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn tones_have_unit_peak() {
        for kind in [SourceKind::Sine, SourceKind::HarmonicComplex, SourceKind::NoiseBurst] {
            let t = tone(kind, 440.0, 8, 24_000, 480, 48_000);
            let peak = t.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            assert!(peak <= 1.0 && peak > 0.9, "{kind:?} peak {peak}");
        }
    }

    #[test]
    fn noise_is_deterministic() {
        assert_eq!(noise_burst(512, 48_000), noise_burst(512, 48_000));
    }

    #[test]
    fn harmonics_above_nyquist_dropped() {
        let a = harmonic_complex(10_000.0, 8, 64, 48_000);
        let b = harmonic_complex(10_000.0, 2, 64, 48_000);
        assert_eq!(a, b);
    }
}
