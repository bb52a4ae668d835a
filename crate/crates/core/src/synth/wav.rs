//! 16-bit stereo PCM WAV I/O.
//!
//! Samples are quantized as `round(x * 32767)` and decoded as `q / 32767`,
//! so decoding and re-encoding a file reproduces it byte for byte.

use std::io::Cursor;
use std::path::Path;

use super::{StereoBuffer, SynthError};

const FULL_SCALE: f64 = 32767.0;

fn quantize(x: f64) -> i16 {
    (x * FULL_SCALE).round() as i16
}

pub fn encode_wav_bytes(buf: &StereoBuffer) -> Result<Vec<u8>, SynthError> {
    let check = |frame: usize, value: f64| {
        if value.is_finite() && (-1.0..=1.0).contains(&value) {
            Ok(())
        } else {
            Err(SynthError::SampleOverflow { frame, value })
        }
    };
    for (frame, (&l, &r)) in buf.left().iter().zip(buf.right()).enumerate() {
        check(frame, l)?;
        check(frame, r)?;
    }
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: buf.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::with_capacity(44 + buf.frames() * 4));
    {
        let wav_err = |e: hound::Error| SynthError::MalformedWav(e.to_string());
        let mut writer = hound::WavWriter::new(&mut cursor, spec).map_err(wav_err)?;
        let mut samples = writer.get_i16_writer(2 * buf.frames() as u32);
        for (&l, &r) in buf.left().iter().zip(buf.right()) {
            samples.write_sample(quantize(l));
            samples.write_sample(quantize(r));
        }
        samples.flush().map_err(wav_err)?;
        writer.finalize().map_err(wav_err)?;
    }
    Ok(cursor.into_inner())
}

pub fn decode_wav_bytes(bytes: &[u8]) -> Result<StereoBuffer, SynthError> {
    let malformed = |e: hound::Error| SynthError::MalformedWav(e.to_string());
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(malformed)?;
    let spec = reader.spec();
    if spec.channels != 2 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(SynthError::MalformedWav(format!(
            "expected 2-channel 16-bit PCM, found {} channel(s) at {} bits ({:?})",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let frames = reader.duration() as usize;
    let mut left = Vec::with_capacity(frames);
    let mut right = Vec::with_capacity(frames);
    for (i, s) in reader.into_samples::<i16>().enumerate() {
        let v = f64::from(s.map_err(malformed)?) / FULL_SCALE;
        if i % 2 == 0 {
            left.push(v);
        } else {
            right.push(v);
        }
    }
    if left.len() != right.len() {
        return Err(SynthError::MalformedWav("odd number of interleaved samples".into()));
    }
    StereoBuffer::new(left, right, spec.sample_rate)
}

/// Writes `buf` to `path` through a temporary file in the same directory.
pub fn encode_wav(buf: &StereoBuffer, path: &Path) -> Result<(), SynthError> {
    let bytes = encode_wav_bytes(buf)?;
    crate::fsutil::write_atomic(path, &bytes).map_err(|e| SynthError::io(path, e))
}

pub fn decode_wav(path: &Path) -> Result<StereoBuffer, SynthError> {
    let bytes = std::fs::read(path).map_err(|e| SynthError::io(path, e))?;
    decode_wav_bytes(&bytes).map_err(|e| match e {
        SynthError::MalformedWav(msg) => SynthError::MalformedWav(format!("{}: {msg}", path.display())),
        other => other,
    })
}
