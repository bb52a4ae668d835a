//! Azimuth-plane data sonification and listening-study tooling.
//!
//! Numeric values are encoded as the direction of a virtual source on a
//! frontal semicircle ([`encoding`]), rendered to binaural stereo
//! ([`synth`]), assembled into seeded study datasets ([`stimuli`]) and
//! counterbalanced participant bundles ([`session`]), and the collected
//! responses are scored and tested ([`analysis`]).

pub mod analysis;
pub mod config;
pub mod encoding;
pub mod fsutil;
pub mod rng;
pub mod session;
pub mod stimuli;
pub mod synth;

pub use config::StimulusConfig;
pub use encoding::{
    angle_to_position, value_to_angle, value_to_frequency, EncodingError, EncodingSpec, PitchSpec,
    PolarPosition,
};
pub use synth::{
    decode_wav, encode_wav, measure_itd, render_stimulus, woodworth_itd, HrirSet, Method,
    RenderConfig, SpatialParams, StereoBuffer, SynthError,
};
