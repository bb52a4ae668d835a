//! Signal-level measurements used to check rendered cues.

use super::{StereoBuffer, SynthError};

const MIN_CORRELATION: f64 = 0.3;

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|s| s * s).sum::<f64>() / x.len() as f64).sqrt()
}

/// Right-minus-left level difference in dB from channel RMS.
pub fn measure_ild_db(buf: &StereoBuffer) -> f64 {
    20.0 * (rms(buf.right()) / rms(buf.left())).log10()
}

/// Interaural lag in seconds at one-sample resolution, searched within
/// `±max_lag_ms`. Positive when the left channel lags the right.
pub fn measure_itd(buf: &StereoBuffer, max_lag_ms: f64) -> Result<f64, SynthError> {
    let left = buf.left();
    let right = buf.right();
    let energy = (left.iter().map(|s| s * s).sum::<f64>() * right.iter().map(|s| s * s).sum::<f64>()).sqrt();
    if energy == 0.0 {
        return Err(SynthError::LowCorrelation(0.0));
    }
    let sr = f64::from(buf.sample_rate());
    let n = left.len();
    let max_lag = ((max_lag_ms * sr / 1000.0).round() as usize).min(n.saturating_sub(1)) as i64;

    // r(lag) = sum_n right[n] * left[n + lag]
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -max_lag..=max_lag {
        let (r_start, l_start) = if lag >= 0 { (0, lag as usize) } else { ((-lag) as usize, 0) };
        let len = n - lag.unsigned_abs() as usize;
        let r: f64 = right[r_start..r_start + len]
            .iter()
            .zip(&left[l_start..l_start + len])
            .map(|(a, b)| a * b)
            .sum();
        if r > best.1 {
            best = (lag, r);
        }
    }
    let peak = best.1 / energy;
    if peak < MIN_CORRELATION {
        return Err(SynthError::LowCorrelation(peak));
    }
    Ok(best.0 as f64 / sr)
}
