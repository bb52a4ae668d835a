//! The JSON render configuration document.
//!
//! ```json
//! {
//!   "encoding": { "v_min": -10, "v_max": 10, "theta_min": -90, "theta_max": 90, "radius": 3 },
//!   "pitch":    { "anchor_hz": 440, "semitones_per_unit": 1 },
//!   "render":   { "sample_rate": 48000, "tone_ms": 500, "repetitions": 3, "spatializer": "parametric" },
//!   "spatial":  { "head_radius_a": 0.0875, "speed_of_sound_c": 343, "ild_max_db": 10 },
//!   "hrir_dir": "hrirs/"
//! }
//! ```
//!
//! Every section and field is optional; unknown keys are rejected.
//! A relative `hrir_dir` resolves against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoding::{EncodingSpec, PitchSpec};
use crate::synth::{HrirSet, RenderConfig, SpatialParams, Spatializer, SynthError};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StimulusConfig {
    pub encoding: EncodingSpec,
    pub pitch: PitchSpec,
    pub render: RenderConfig,
    pub spatial: SpatialParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hrir_dir: Option<PathBuf>,
}

impl StimulusConfig {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path).map_err(|e| SynthError::io(path, e))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| SynthError::InvalidConfig(format!("{}: {e}", path.display())))?;
        if let Some(dir) = cfg.hrir_dir.as_mut() {
            if dir.is_relative() {
                if let Some(base) = path.parent() {
                    *dir = base.join(&*dir);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.encoding.validate()?;
        self.pitch.validate()?;
        self.render.validate()?;
        self.spatial.validate()
    }

    /// Loads the HRIR set when the HRIR spatializer is selected.
    pub fn load_hrirs(&self) -> Result<Option<HrirSet>, SynthError> {
        if self.render.spatializer != Spatializer::Hrir {
            return Ok(None);
        }
        let dir = self.hrir_dir.as_ref().ok_or(SynthError::MissingHrirSet)?;
        HrirSet::load_dir(dir).map(Some)
    }
}
