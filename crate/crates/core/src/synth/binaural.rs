//! Parametric spherical-head spatializer.
//!
//! Interaural time difference follows Woodworth's far-field formula and is
//! realized as a fractional delay split evenly between the ears. Level
//! difference is a sine law in azimuth.

use serde::{Deserialize, Serialize};

use super::source::blackman;
use super::{StereoBuffer, SynthError};

/// Half-width of the 31-tap fractional delay kernel.
const HALF_TAPS: i64 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialParams {
    /// Head radius in meters.
    pub head_radius_a: f64,
    /// Speed of sound in m/s.
    pub speed_of_sound_c: f64,
    /// Level difference between the ears for a source at 90 degrees.
    pub ild_max_db: f64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            head_radius_a: 0.0875,
            speed_of_sound_c: 343.0,
            ild_max_db: 10.0,
        }
    }
}

impl SpatialParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fields = [
            ("head_radius_a", self.head_radius_a),
            ("speed_of_sound_c", self.speed_of_sound_c),
            ("ild_max_db", self.ild_max_db),
        ];
        for (name, x) in fields {
            if !(x.is_finite() && x > 0.0) {
                return Err(SynthError::InvalidConfig(format!(
                    "{name} must be positive, got {x}"
                )));
            }
        }
        Ok(())
    }
}

fn check_angle(theta: f64) -> Result<f64, SynthError> {
    if (-90.0..=90.0).contains(&theta) {
        Ok(theta.to_radians())
    } else {
        Err(SynthError::AngleOutOfRange(theta))
    }
}

/// Interaural time difference in seconds; positive when the right ear
/// leads.
pub fn woodworth_itd(theta_deg: f64, params: &SpatialParams) -> Result<f64, SynthError> {
    let rad = check_angle(theta_deg)?;
    Ok(params.head_radius_a / params.speed_of_sound_c * (rad + rad.sin()))
}

/// `(left_gain_db, right_gain_db)`.
pub fn parametric_ild(theta_deg: f64, params: &SpatialParams) -> Result<(f64, f64), SynthError> {
    let rad = check_angle(theta_deg)?;
    let half = 0.5 * params.ild_max_db * rad.sin();
    Ok((-half, half))
}

/// Windowed-sinc kernel for a delay of `frac` samples, `|frac| <= 0.5`.
/// Index `k` of the result corresponds to tap offset `k - HALF_TAPS`.
fn fractional_kernel(frac: f64) -> Vec<f64> {
    let width = 2.0 * HALF_TAPS as f64 + 2.0;
    let mut taps: Vec<f64> = (-HALF_TAPS..=HALF_TAPS)
        .map(|k| {
            let t = k as f64 - frac;
            let sinc = if t == 0.0 {
                1.0
            } else {
                (std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t)
            };
            sinc * blackman(t, width)
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|h| *h /= dc);
    taps
}

/// Delays `x` by `delay` samples (negative advances), keeping the length.
/// Content shifted past either end is dropped.
pub fn fractional_delay(x: &[f64], delay: f64) -> Vec<f64> {
    let whole = delay.round();
    let frac = delay - whole;
    let whole = whole as i64;
    let n = x.len() as i64;
    if frac == 0.0 {
        return (0..n)
            .map(|i| {
                let j = i - whole;
                if (0..n).contains(&j) { x[j as usize] } else { 0.0 }
            })
            .collect();
    }
    let taps = fractional_kernel(frac);
    (0..n)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(k, h)| {
                    let j = i - whole - (k as i64 - HALF_TAPS);
                    if (0..n).contains(&j) { h * x[j as usize] } else { 0.0 }
                })
                .sum()
        })
        .collect()
}

/// Places a mono signal at azimuth `theta_deg`.
pub fn spatialize(
    mono: &[f64],
    theta_deg: f64,
    params: &SpatialParams,
    sample_rate: u32,
) -> Result<StereoBuffer, SynthError> {
    let itd_samples = woodworth_itd(theta_deg, params)? * f64::from(sample_rate);
    let (left_db, right_db) = parametric_ild(theta_deg, params)?;
    let left_gain = 10f64.powf(left_db / 20.0);
    let right_gain = 10f64.powf(right_db / 20.0);
    let mut left = fractional_delay(mono, itd_samples / 2.0);
    let mut right = fractional_delay(mono, -itd_samples / 2.0);
    left.iter_mut().for_each(|s| *s *= left_gain);
    right.iter_mut().for_each(|s| *s *= right_gain);
    StereoBuffer::new(left, right, sample_rate)
}
