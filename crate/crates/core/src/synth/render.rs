//! Stimulus assembly.
//!
//! A single value plays `repetitions` times with `intra_gap_ms` of silence
//! between copies. A sequence plays each value once per pass, separated by
//! `inter_value_gap_ms`, and the whole pass repeats `repetitions` times with
//! `inter_pass_gap_ms` in between. The finished buffer is scaled so its
//! peak sits at `peak_dbfs`.

use super::binaural::spatialize;
use super::hrir::hrir_spatialize;
use super::source::tone;
use super::{HrirSet, Method, SourceKind, Spatializer, StereoBuffer, SynthError};
use crate::config::StimulusConfig;
use crate::encoding::{value_to_angle, value_to_frequency};

/// Frame offsets at which each tone starts, paired with the value index.
fn onsets(n_values: usize, cfg: &crate::synth::RenderConfig) -> Vec<(usize, usize)> {
    let tone = cfg.frames(cfg.tone_ms);
    let reps = cfg.repetitions as usize;
    if n_values == 1 {
        let step = tone + cfg.frames(cfg.intra_gap_ms);
        return (0..reps).map(|r| (r * step, 0)).collect();
    }
    let step = tone + cfg.frames(cfg.inter_value_gap_ms);
    let pass = n_values * tone + (n_values - 1) * cfg.frames(cfg.inter_value_gap_ms);
    let pass_step = pass + cfg.frames(cfg.inter_pass_gap_ms);
    (0..reps)
        .flat_map(|p| (0..n_values).map(move |i| (p * pass_step + i * step, i)))
        .collect()
}

/// Length of the schedule for `n_values` values, before any convolution
/// tail.
pub fn schedule_frames(n_values: usize, cfg: &crate::synth::RenderConfig) -> usize {
    if n_values == 0 {
        return 0;
    }
    let tone = cfg.frames(cfg.tone_ms);
    let reps = cfg.repetitions as usize;
    if n_values == 1 {
        reps * tone + (reps - 1) * cfg.frames(cfg.intra_gap_ms)
    } else {
        let pass = n_values * tone + (n_values - 1) * cfg.frames(cfg.inter_value_gap_ms);
        reps * pass + (reps - 1) * cfg.frames(cfg.inter_pass_gap_ms)
    }
}

fn render_tone(
    v: f64,
    method: Method,
    config: &StimulusConfig,
    hrirs: Option<&HrirSet>,
) -> Result<StereoBuffer, SynthError> {
    let cfg = &config.render;
    let frames = cfg.frames(cfg.tone_ms);
    let ramp = cfg.frames(cfg.ramp_ms);
    let sr = cfg.sample_rate;
    match method {
        Method::Spatial => {
            let theta = value_to_angle(v, &config.encoding)?;
            let mono = tone(cfg.source_for(method), cfg.source_hz, cfg.harmonics, frames, ramp, sr);
            match cfg.spatializer {
                Spatializer::Parametric => spatialize(&mono, theta, &config.spatial, sr),
                Spatializer::Hrir => {
                    let set = hrirs.ok_or(SynthError::MissingHrirSet)?;
                    hrir_spatialize(&mono, theta, set, sr)
                }
            }
        }
        Method::Pitch => {
            let freq = value_to_frequency(v, &config.encoding, &config.pitch)?;
            let kind = cfg.source_for(method);
            if kind == SourceKind::NoiseBurst {
                return Err(SynthError::InvalidConfig(
                    "noise_burst carries no pitch and cannot render pitch stimuli".into(),
                ));
            }
            Ok(StereoBuffer::diotic(tone(kind, freq, cfg.harmonics, frames, ramp, sr), sr))
        }
    }
}

pub fn render_stimulus(
    values: &[f64],
    method: Method,
    config: &StimulusConfig,
    hrirs: Option<&HrirSet>,
) -> Result<StereoBuffer, SynthError> {
    config.validate()?;
    if values.is_empty() {
        return Err(SynthError::EmptyValues);
    }
    let cfg = &config.render;
    if method == Method::Spatial && cfg.spatializer == Spatializer::Hrir {
        let set = hrirs.ok_or(SynthError::MissingHrirSet)?;
        if set.sample_rate() != cfg.sample_rate {
            return Err(SynthError::SampleRateMismatch {
                expected: cfg.sample_rate,
                found: set.sample_rate(),
            });
        }
    }
    // Range-check everything before doing any synthesis.
    for &v in values {
        value_to_angle(v, &config.encoding)?;
    }

    let tones = values
        .iter()
        .map(|&v| render_tone(v, method, config, hrirs))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = StereoBuffer::silent(schedule_frames(values.len(), cfg), cfg.sample_rate);
    for (offset, idx) in onsets(values.len(), cfg) {
        out.mix_at(&tones[idx], offset);
    }
    let peak = out.peak();
    if peak > 0.0 {
        out.scale(cfg.peak_amplitude() / peak);
    }
    Ok(out)
}
