//! Measured head-related impulse responses.
//!
//! On disk a set is a directory holding `manifest.json` (`{"sample_rate": N}`)
//! and one stereo 16-bit WAV per azimuth named `az<angle>.wav`, where the
//! angle is a signed integer padded to three digits: `az-045.wav`,
//! `az000.wav`, `az045.wav`. Left channel is the left-ear response.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::binaural::{fractional_delay, parametric_ild, woodworth_itd, SpatialParams};
use super::{wav, StereoBuffer, SynthError};

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct HrirPair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl HrirPair {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HrirManifest {
    sample_rate: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrirSet {
    entries: BTreeMap<i32, HrirPair>,
    sample_rate: u32,
}

impl HrirSet {
    pub fn new(entries: BTreeMap<i32, HrirPair>, sample_rate: u32) -> Result<Self, SynthError> {
        if entries.is_empty() {
            return Err(SynthError::EmptySet);
        }
        for (&angle, pair) in &entries {
            if !(-90..=90).contains(&angle) {
                return Err(SynthError::AngleOutOfRange(f64::from(angle)));
            }
            if pair.left.len() != pair.right.len() || pair.left.is_empty() {
                return Err(SynthError::InvalidConfig(format!(
                    "HRIR at {angle} degrees has responses of length {} and {}",
                    pair.left.len(),
                    pair.right.len()
                )));
            }
        }
        Ok(Self {
            entries,
            sample_rate,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn entries(&self) -> &BTreeMap<i32, HrirPair> {
        &self.entries
    }

    pub fn angles(&self) -> impl Iterator<Item = i32> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_ir_len(&self) -> usize {
        self.entries.values().map(HrirPair::len).max().unwrap_or(0)
    }

    /// Entry closest to `theta_deg`; equidistant candidates resolve toward 0.
    pub fn nearest(&self, theta_deg: f64) -> (i32, &HrirPair) {
        let mut best: Option<(i32, &HrirPair)> = None;
        for (&angle, pair) in &self.entries {
            let dist = (f64::from(angle) - theta_deg).abs();
            best = match best {
                None => Some((angle, pair)),
                Some((b, bp)) => {
                    let bdist = (f64::from(b) - theta_deg).abs();
                    if dist < bdist || (dist == bdist && angle.abs() < b.abs()) {
                        Some((angle, pair))
                    } else {
                        Some((b, bp))
                    }
                }
            };
        }
        best.expect("HrirSet is never empty")
    }

    pub fn file_name(angle: i32) -> String {
        if angle < 0 {
            format!("az-{:03}.wav", -angle)
        } else {
            format!("az{angle:03}.wav")
        }
    }

    fn parse_file_name(name: &str) -> Option<i32> {
        let digits = name.strip_prefix("az")?.strip_suffix(".wav")?;
        let (sign, body) = match digits.as_bytes().first()? {
            b'-' => (-1, &digits[1..]),
            b'+' => (1, &digits[1..]),
            _ => (1, digits),
        };
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        body.parse::<i32>().ok().map(|v| sign * v)
    }

    pub fn load_dir(dir: &Path) -> Result<Self, SynthError> {
        let manifest_path = dir.join(MANIFEST);
        let text = fs::read_to_string(&manifest_path).map_err(|e| SynthError::io(&manifest_path, e))?;
        let manifest: HrirManifest = serde_json::from_str(&text).map_err(|e| {
            SynthError::InvalidConfig(format!("{}: {e}", manifest_path.display()))
        })?;
        let mut entries = BTreeMap::new();
        let listing = fs::read_dir(dir).map_err(|e| SynthError::io(dir, e))?;
        for item in listing {
            let item = item.map_err(|e| SynthError::io(dir, e))?;
            let name = item.file_name();
            let Some(angle) = name.to_str().and_then(Self::parse_file_name) else {
                continue;
            };
            let buf = wav::decode_wav(&item.path())?;
            if buf.sample_rate() != manifest.sample_rate {
                return Err(SynthError::SampleRateMismatch {
                    expected: manifest.sample_rate,
                    found: buf.sample_rate(),
                });
            }
            let (left, right) = buf.into_channels();
            if entries.insert(angle, HrirPair { left, right }).is_some() {
                return Err(SynthError::InvalidConfig(format!(
                    "duplicate HRIR entries for {angle} degrees"
                )));
            }
        }
        Self::new(entries, manifest.sample_rate)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), SynthError> {
        fs::create_dir_all(dir).map_err(|e| SynthError::io(dir, e))?;
        for (&angle, pair) in &self.entries {
            let buf = StereoBuffer::new(pair.left.clone(), pair.right.clone(), self.sample_rate)?;
            wav::encode_wav(&buf, &dir.join(Self::file_name(angle)))?;
        }
        let manifest = serde_json::to_string_pretty(&HrirManifest {
            sample_rate: self.sample_rate,
        })
        .expect("manifest serializes");
        let path = dir.join(MANIFEST);
        crate::fsutil::write_atomic(&path, manifest.as_bytes()).map_err(|e| SynthError::io(&path, e))
    }

    /// A set whose responses are pure delays and gains from the parametric
    /// model, each of length `ir_len`. Rendering through it reproduces the
    /// parametric cues up to a common latency of `ir_len / 2` samples.
    pub fn from_parametric(
        params: &SpatialParams,
        sample_rate: u32,
        angles: impl IntoIterator<Item = i32>,
        ir_len: usize,
    ) -> Result<Self, SynthError> {
        let mut impulse = vec![0.0; ir_len];
        let centre = ir_len / 2;
        if let Some(s) = impulse.get_mut(centre) {
            *s = 1.0;
        }
        let mut entries = BTreeMap::new();
        for angle in angles {
            let theta = f64::from(angle);
            let itd = woodworth_itd(theta, params)? * f64::from(sample_rate);
            let (ldb, rdb) = parametric_ild(theta, params)?;
            // Keep responses inside 16-bit full scale when written to disk.
            let lg = 10f64.powf(ldb / 20.0) * 0.5;
            let rg = 10f64.powf(rdb / 20.0) * 0.5;
            let left = fractional_delay(&impulse, itd / 2.0).into_iter().map(|s| s * lg).collect();
            let right = fractional_delay(&impulse, -itd / 2.0).into_iter().map(|s| s * rg).collect();
            entries.insert(angle, HrirPair { left, right });
        }
        Self::new(entries, sample_rate)
    }
}

fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (o, &hk) in out[i..].iter_mut().zip(h) {
            *o += xi * hk;
        }
    }
    out
}

/// Convolves `mono` with the nearest entry's responses. The result is
/// `mono.len() + ir_len - 1` frames long and rescaled so its peak equals the
/// input peak.
pub fn hrir_spatialize(
    mono: &[f64],
    theta_deg: f64,
    set: &HrirSet,
    sample_rate: u32,
) -> Result<StereoBuffer, SynthError> {
    if set.entries.is_empty() {
        return Err(SynthError::EmptySet);
    }
    if set.sample_rate != sample_rate {
        return Err(SynthError::SampleRateMismatch {
            expected: sample_rate,
            found: set.sample_rate,
        });
    }
    let (_, pair) = set.nearest(theta_deg);
    let left = convolve(mono, &pair.left);
    let right = convolve(mono, &pair.right);
    let mut out = StereoBuffer::new(left, right, sample_rate)?;
    let in_peak = mono.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let out_peak = out.peak();
    if out_peak > 0.0 {
        out.scale(in_peak / out_peak);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(len: usize, at: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[at] = 1.0;
        v
    }

    fn grid_set() -> HrirSet {
        let entries = (-10..=10)
            .map(|i| (i * 9, HrirPair { left: unit(4, 0), right: unit(4, 0) }))
            .collect();
        HrirSet::new(entries, 48_000).unwrap()
    }

    #[test]
    fn identity_responses_copy_input() {
        let mut entries = BTreeMap::new();
        entries.insert(0, HrirPair { left: vec![1.0], right: vec![1.0] });
        let set = HrirSet::new(entries, 48_000).unwrap();
        let x = vec![0.1, -0.5, 0.25, 0.0, 0.3];
        let out = hrir_spatialize(&x, 0.0, &set, 48_000).unwrap();
        assert_eq!(out.left(), &x[..]);
        assert_eq!(out.right(), &x[..]);
    }

    #[test]
    fn delayed_left_response_shifts_left_channel() {
        let k = 5;
        let mut entries = BTreeMap::new();
        entries.insert(30, HrirPair { left: unit(8, k), right: unit(8, 0) });
        let set = HrirSet::new(entries, 48_000).unwrap();
        let x: Vec<f64> = (0..50).map(|i| ((i * 7) % 11) as f64 / 11.0).collect();
        let out = hrir_spatialize(&x, 30.0, &set, 48_000).unwrap();
        assert_eq!(out.frames(), x.len() + 8 - 1);
        for n in 0..x.len() {
            assert_eq!(out.left()[n + k], out.right()[n]);
        }
    }

    #[test]
    fn nearest_angle_selection() {
        let set = grid_set();
        assert_eq!(set.nearest(4.0).0, 0);
        assert_eq!(set.nearest(5.0).0, 9);
        assert_eq!(set.nearest(4.5).0, 0);
        assert_eq!(set.nearest(-4.5).0, 0);
        assert_eq!(set.nearest(-13.5).0, -9);
        assert_eq!(set.nearest(200.0).0, 90);
    }

    #[test]
    fn errors() {
        assert!(matches!(HrirSet::new(BTreeMap::new(), 48_000), Err(SynthError::EmptySet)));
        let set = grid_set();
        assert!(matches!(
            hrir_spatialize(&[1.0], 0.0, &set, 44_100),
            Err(SynthError::SampleRateMismatch { .. })
        ));
        let mut entries = BTreeMap::new();
        entries.insert(0, HrirPair { left: vec![1.0, 0.0], right: vec![1.0] });
        assert!(HrirSet::new(entries, 48_000).is_err());
        let mut entries = BTreeMap::new();
        entries.insert(120, HrirPair { left: vec![1.0], right: vec![1.0] });
        assert!(HrirSet::new(entries, 48_000).is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(HrirSet::file_name(-45), "az-045.wav");
        assert_eq!(HrirSet::file_name(0), "az000.wav");
        assert_eq!(HrirSet::file_name(90), "az090.wav");
        for a in [-90, -45, -9, 0, 9, 90] {
            assert_eq!(HrirSet::parse_file_name(&HrirSet::file_name(a)), Some(a));
        }
        assert_eq!(HrirSet::parse_file_name("az+045.wav"), Some(45));
        assert_eq!(HrirSet::parse_file_name("az-.wav"), None);
        assert_eq!(HrirSet::parse_file_name("manifest.json"), None);
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let set = HrirSet::from_parametric(&SpatialParams::default(), 48_000, [-90, 0, 45], 64).unwrap();
        set.write_dir(dir.path()).unwrap();
        let loaded = HrirSet::load_dir(dir.path()).unwrap();
        assert_eq!(loaded.angles().collect::<Vec<_>>(), vec![-90, 0, 45]);
        assert_eq!(loaded.max_ir_len(), 64);
        for (a, pair) in set.entries() {
            let got = &loaded.entries()[a];
            for (x, y) in pair.left.iter().zip(&got.left) {
                assert!((x - y).abs() <= 1.0 / 32767.0);
            }
        }
    }
}
