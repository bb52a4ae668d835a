//! Value-to-direction and value-to-pitch mappings.
//!
//! Data values are laid out on a frontal semicircle: `v_min` sits hard left,
//! `v_max` hard right, and the midpoint straight ahead. Angles are in degrees,
//! zero straight ahead, positive to the listener's right.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodingError {
    #[error("value {value} outside encoding range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("invalid encoding spec: {0}")]
    InvalidSpec(String),
}

/// Affine map from the data range onto an arc of azimuth angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodingSpec {
    pub v_min: f64,
    pub v_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Virtual source distance in meters.
    pub radius: f64,
    /// Degrees per integer step under the defaults. Informational only.
    pub angular_interval: f64,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        Self {
            v_min: -10.0,
            v_max: 10.0,
            theta_min: -90.0,
            theta_max: 90.0,
            radius: 3.0,
            angular_interval: 9.0,
        }
    }
}

impl EncodingSpec {
    pub fn validate(&self) -> Result<(), EncodingError> {
        let finite = [self.v_min, self.v_max, self.theta_min, self.theta_max, self.radius]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(EncodingError::InvalidSpec("non-finite field".into()));
        }
        if self.v_min >= self.v_max {
            return Err(EncodingError::InvalidSpec(format!(
                "v_min ({}) must be below v_max ({})",
                self.v_min, self.v_max
            )));
        }
        if self.theta_min >= self.theta_max {
            return Err(EncodingError::InvalidSpec(format!(
                "theta_min ({}) must be below theta_max ({})",
                self.theta_min, self.theta_max
            )));
        }
        if self.radius <= 0.0 {
            return Err(EncodingError::InvalidRadius(self.radius));
        }
        Ok(())
    }

    /// Degrees of azimuth per unit of data value.
    pub fn degrees_per_unit(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.v_max - self.v_min)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.v_min && v <= self.v_max
    }

    fn check(&self, v: f64) -> Result<(), EncodingError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(EncodingError::OutOfRange {
                value: v,
                min: self.v_min,
                max: self.v_max,
            })
        }
    }

    /// Inverse of [`value_to_angle`], without range checking.
    pub fn angle_to_value(&self, theta: f64) -> f64 {
        self.v_min + (theta - self.theta_min) / self.degrees_per_unit()
    }
}

/// Cartesian position of a virtual source: `x` forward, `y` to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPosition {
    pub x: f64,
    pub y: f64,
}

impl PolarPosition {
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Equal-tempered pitch mapping used by the baseline condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchSpec {
    /// Frequency assigned to a data value of zero.
    pub anchor_hz: f64,
    pub semitones_per_unit: f64,
}

impl Default for PitchSpec {
    fn default() -> Self {
        Self {
            anchor_hz: 440.0,
            semitones_per_unit: 1.0,
        }
    }
}

impl PitchSpec {
    pub fn validate(&self) -> Result<(), EncodingError> {
        if !(self.anchor_hz.is_finite() && self.anchor_hz > 0.0) {
            return Err(EncodingError::InvalidSpec(format!(
                "anchor_hz must be positive, got {}",
                self.anchor_hz
            )));
        }
        if !self.semitones_per_unit.is_finite() || self.semitones_per_unit == 0.0 {
            return Err(EncodingError::InvalidSpec(
                "semitones_per_unit must be finite and non-zero".into(),
            ));
        }
        Ok(())
    }
}

pub fn value_to_angle(v: f64, spec: &EncodingSpec) -> Result<f64, EncodingError> {
    spec.check(v)?;
    Ok(spec.theta_min + (v - spec.v_min) * spec.degrees_per_unit())
}

pub fn angle_to_position(theta_deg: f64, radius: f64) -> Result<PolarPosition, EncodingError> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(EncodingError::InvalidRadius(radius));
    }
    let (sin, cos) = theta_deg.to_radians().sin_cos();
    Ok(PolarPosition {
        x: radius * cos,
        y: radius * sin,
    })
}

pub fn value_to_frequency(
    v: f64,
    spec: &EncodingSpec,
    pitch: &PitchSpec,
) -> Result<f64, EncodingError> {
    spec.check(v)?;
    Ok(pitch.anchor_hz * (v * pitch.semitones_per_unit / 12.0).exp2())
}
