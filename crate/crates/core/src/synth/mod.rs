//! Stereo stimulus rendering.
//!
//! Tones come from [`source`], get placed in the azimuth plane by
//! [`binaural`] (parametric ITD/ILD) or [`hrir`] (measured impulse
//! responses), and are laid out on the playback schedule by [`render`].

pub mod binaural;
pub mod hrir;
pub mod measure;
pub mod render;
pub mod source;
pub mod wav;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::EncodingError;

pub use binaural::{parametric_ild, woodworth_itd, SpatialParams};
pub use hrir::{hrir_spatialize, HrirSet};
pub use measure::{measure_ild_db, measure_itd, rms};
pub use render::{render_stimulus, schedule_frames};
pub use wav::{decode_wav, decode_wav_bytes, encode_wav, encode_wav_bytes};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("angle {0} degrees outside [-90, 90]")]
    AngleOutOfRange(f64),
    #[error("at least one value is required")]
    EmptyValues,
    #[error("spatializer is `hrir` but no HRIR set was provided")]
    MissingHrirSet,
    #[error("HRIR set has no entries")]
    EmptySet,
    #[error("sample rate mismatch: expected {expected} Hz, found {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },
    #[error("sample {value} at frame {frame} is outside [-1, 1]")]
    SampleOverflow { frame: usize, value: f64 },
    #[error("malformed WAV: {0}")]
    MalformedWav(String),
    #[error("peak normalized cross-correlation {0:.3} is below 0.3")]
    LowCorrelation(f64),
    #[error("channel lengths differ: left {left}, right {right}")]
    ChannelLengthMismatch { left: usize, right: usize },
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SynthError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        SynthError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Two equal-length channels at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoBuffer {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate: u32,
}

impl StereoBuffer {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self, SynthError> {
        if left.len() != right.len() {
            return Err(SynthError::ChannelLengthMismatch {
                left: left.len(),
                right: right.len(),
            });
        }
        Ok(Self {
            left,
            right,
            sample_rate,
        })
    }

    pub fn silent(frames: usize, sample_rate: u32) -> Self {
        Self {
            left: vec![0.0; frames],
            right: vec![0.0; frames],
            sample_rate,
        }
    }

    pub fn diotic(mono: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            right: mono.clone(),
            left: mono,
            sample_rate,
        }
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frames(&self) -> usize {
        self.left.len()
    }

    pub fn duration_secs(&self) -> f64 {
        self.frames() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0f64, |m, s| m.max(s.abs()))
    }

    pub(crate) fn scale(&mut self, gain: f64) {
        for s in self.left.iter_mut().chain(self.right.iter_mut()) {
            *s *= gain;
        }
    }

    /// Mixes `other` into `self` starting at `offset`, growing as needed.
    pub(crate) fn mix_at(&mut self, other: &StereoBuffer, offset: usize) {
        let end = offset + other.frames();
        if end > self.frames() {
            self.left.resize(end, 0.0);
            self.right.resize(end, 0.0);
        }
        for (dst, src) in self.left[offset..end].iter_mut().zip(&other.left) {
            *dst += src;
        }
        for (dst, src) in self.right[offset..end].iter_mut().zip(&other.right) {
            *dst += src;
        }
    }

    pub fn into_channels(self) -> (Vec<f64>, Vec<f64>) {
        (self.left, self.right)
    }
}

/// Which cue carries the data value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spatial,
    Pitch,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spatial => "spatial",
            Method::Pitch => "pitch",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spatial" => Ok(Method::Spatial),
            "pitch" => Ok(Method::Pitch),
            other => Err(format!("unknown method `{other}` (expected spatial or pitch)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    HarmonicComplex,
    Sine,
    NoiseBurst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spatializer {
    #[default]
    Parametric,
    Hrir,
}

/// Timing, level and source settings shared by every rendered stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub sample_rate: u32,
    pub bit_depth: u16,
    pub tone_ms: f64,
    pub repetitions: u32,
    pub intra_gap_ms: f64,
    pub inter_value_gap_ms: f64,
    pub inter_pass_gap_ms: f64,
    pub ramp_ms: f64,
    pub peak_dbfs: f64,
    /// `None` picks the per-method default: harmonic complex for spatial
    /// stimuli, sine for pitch stimuli.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_kind: Option<SourceKind>,
    /// Fundamental of the spatial source tone.
    pub source_hz: f64,
    /// Partial count of the harmonic complex.
    pub harmonics: u32,
    pub spatializer: Spatializer,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            sample_rate: 48_000,
            bit_depth: 16,
            tone_ms: 500.0,
            repetitions: 3,
            intra_gap_ms: 250.0,
            inter_value_gap_ms: 700.0,
            inter_pass_gap_ms: 1000.0,
            ramp_ms: 10.0,
            peak_dbfs: -6.0,
            source_kind: None,
            source_hz: 440.0,
            harmonics: 8,
            spatializer: Spatializer::Parametric,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.sample_rate == 0 {
            return bad("sample_rate must be positive".into());
        }
        if self.bit_depth != 16 {
            return bad(format!("bit_depth must be 16, got {}", self.bit_depth));
        }
        let durations = [
            ("tone_ms", self.tone_ms),
            ("intra_gap_ms", self.intra_gap_ms),
            ("inter_value_gap_ms", self.inter_value_gap_ms),
            ("inter_pass_gap_ms", self.inter_pass_gap_ms),
            ("ramp_ms", self.ramp_ms),
        ];
        for (name, ms) in durations {
            if !(ms.is_finite() && ms >= 0.0) {
                return bad(format!("{name} must be a non-negative duration, got {ms}"));
            }
        }
        if self.tone_ms <= 2.0 * self.ramp_ms {
            return bad(format!(
                "tone_ms ({}) must exceed twice ramp_ms ({})",
                self.tone_ms, self.ramp_ms
            ));
        }
        if self.repetitions < 1 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.peak_dbfs.is_finite() && self.peak_dbfs <= 0.0) {
            return bad(format!("peak_dbfs must be <= 0, got {}", self.peak_dbfs));
        }
        if !(self.source_hz.is_finite() && self.source_hz > 0.0) {
            return bad(format!("source_hz must be positive, got {}", self.source_hz));
        }
        if self.harmonics < 1 {
            return bad("harmonics must be at least 1".into());
        }
        Ok(())
    }

    pub fn frames(&self, ms: f64) -> usize {
        (ms * f64::from(self.sample_rate) / 1000.0).round() as usize
    }

    pub fn source_for(&self, method: Method) -> SourceKind {
        self.source_kind.unwrap_or(match method {
            Method::Spatial => SourceKind::HarmonicComplex,
            Method::Pitch => SourceKind::Sine,
        })
    }

    pub fn peak_amplitude(&self) -> f64 {
        10f64.powf(self.peak_dbfs / 20.0)
    }
}
