//! Participant session bundles and response scoring.
//!
//! A bundle directory holds `manifest.json` (participant-facing, no answers),
//! `answer_key.json` (ground truth per trial id) and `stimuli/<trial_id>.wav`.
//! Both conditions reuse the same seeded datasets so that trial `k` of the
//! spatial block and trial `k` of the pitch block carry identical values.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::StimulusConfig;
use crate::rng::RNG_ALGORITHM;
use crate::stimuli::{
    gen_comparison_pairs, gen_single_values, gen_trend_sets, ComparisonAnswer, GroundTruth, Sign,
    StimulusItem, TaskKind, TrendType, VALUE_MAX, VALUE_MIN,
};
use crate::synth::{self, HrirSet, Method, SynthError};

pub const SCHEMA_VERSION: u32 = 1;
pub const TRIALS_PER_BLOCK: usize = 45;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANSWER_KEY_FILE: &str = "answer_key.json";
pub const STIMULI_DIR: &str = "stimuli";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Render(#[from] SynthError),
    #[error("response log is for session `{found}`, bundle is `{expected}`")]
    SessionMismatch { expected: String, found: String },
    #[error("no response for trial `{0}`")]
    MissingResponse(String),
    #[error("response for unknown trial `{0}`")]
    UnknownTrial(String),
    #[error("more than one response for trial `{0}`")]
    DuplicateResponse(String),
    #[error("malformed response for trial `{trial_id}`: {reason}")]
    MalformedResponse { trial_id: String, reason: String },
    #[error("answer key has no entry for trial `{0}`")]
    MissingKeyEntry(String),
}

impl SessionError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        SessionError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Even indices run spatial first, odd indices pitch first.
pub fn counterbalance_order(participant_index: u32) -> [Method; 2] {
    if participant_index.is_multiple_of(2) {
        [Method::Spatial, Method::Pitch]
    } else {
        [Method::Pitch, Method::Spatial]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceOptions {
    pub choices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignExactOptions {
    pub sign_choices: Vec<String>,
    pub exact_min: i32,
    pub exact_max: i32,
}

/// Answer controls offered for a trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResponseOptions {
    Choices(ChoiceOptions),
    SignAndExact(SignExactOptions),
}

impl ResponseOptions {
    pub fn for_task(task: TaskKind) -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        match task {
            TaskKind::Comparison => ResponseOptions::Choices(ChoiceOptions {
                choices: owned(&["first", "second", "equal"]),
            }),
            TaskKind::Trend => ResponseOptions::Choices(ChoiceOptions {
                choices: TrendType::ALL.iter().map(|t| t.as_str().to_string()).collect(),
            }),
            TaskKind::Single => ResponseOptions::SignAndExact(SignExactOptions {
                sign_choices: owned(&["positive", "negative", "zero"]),
                exact_min: VALUE_MIN,
                exact_max: VALUE_MAX,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trial {
    pub trial_id: String,
    pub task: TaskKind,
    pub audio_file: String,
    pub response_options: ResponseOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub method: Method,
    pub trials: Vec<Trial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    pub schema_version: u32,
    pub session_id: String,
    pub participant_id: String,
    pub participant_index: u32,
    pub seed: u64,
    pub sample_rate: u32,
    pub rng_algorithm: String,
    pub condition_order: [Method; 2],
    pub blocks: Vec<Block>,
}

impl SessionManifest {
    pub fn trials(&self) -> impl Iterator<Item = (Method, &Trial)> {
        self.blocks
            .iter()
            .flat_map(|b| b.trials.iter().map(move |t| (b.method, t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerEntry {
    pub values: Vec<i32>,
    pub ground_truth: GroundTruth,
    pub gap_or_interval: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerKey {
    pub schema_version: u32,
    pub session_id: String,
    pub entries: BTreeMap<String, AnswerEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleResponse {
    pub sign: Sign,
    pub exact: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponsePayload {
    Comparison(ComparisonAnswer),
    Trend(TrendType),
    Single(SingleResponse),
    /// The per-trial time limit ran out before an answer was given.
    Timeout,
}

impl ResponsePayload {
    /// The payload that answers `truth` correctly.
    pub fn perfect(truth: &GroundTruth) -> Self {
        match *truth {
            GroundTruth::Comparison(a) => ResponsePayload::Comparison(a),
            GroundTruth::Trend(t) => ResponsePayload::Trend(t),
            GroundTruth::Single(s) => ResponsePayload::Single(SingleResponse {
                sign: s.sign,
                exact: s.exact,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseRecord {
    pub trial_id: String,
    pub response: ResponsePayload,
    pub latency_ms: f64,
    pub replay_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseLog {
    pub schema_version: u32,
    pub session_id: String,
    pub responses: Vec<ResponseRecord>,
    /// Set by the trial runner when a session was aborted early.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialScore {
    pub trial_id: String,
    pub task: TaskKind,
    pub method: Method,
    pub gap_or_interval: Option<i32>,
    /// For single-value trials this is the sign sub-answer.
    pub correct: bool,
    pub exact_match: Option<bool>,
    /// Absent for single-value trials that timed out.
    pub abs_diff: Option<u32>,
    /// The true value of a single-value trial.
    pub truth_value: Option<i32>,
    pub latency_ms: f64,
    pub replay_count: u32,
    #[serde(default)]
    pub timed_out: bool,
}

/// Scores for one participant session, as written by `session-score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreSheet {
    pub schema_version: u32,
    pub session_id: String,
    pub participant_id: String,
    pub participant_group: String,
    pub scores: Vec<TrialScore>,
}

pub fn trial_id(method: Method, task: TaskKind, ordinal: usize) -> String {
    format!("{}-{}-{:02}", method.as_str(), task.as_str(), ordinal)
}

/// The 45 study items in presentation order: comparison, trend, single.
pub fn session_items(seed: u64) -> Vec<StimulusItem> {
    let mut items = gen_comparison_pairs(seed);
    items.extend(gen_trend_sets(seed));
    items.extend(gen_single_values(seed));
    debug_assert_eq!(items.len(), TRIALS_PER_BLOCK);
    items
}

#[derive(Debug, Clone)]
pub struct SessionBundle {
    pub manifest: SessionManifest,
    pub key: AnswerKey,
    pub audio_files: Vec<PathBuf>,
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("session documents serialize");
    text.push('\n');
    text.into_bytes()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SessionError> {
    crate::fsutil::write_atomic(path, &to_json(value)).map_err(|e| SessionError::io(path, e))
}

/// Reads a schema-versioned JSON document, rejecting unknown fields.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, SessionError> {
    let text = std::fs::read_to_string(path).map_err(|e| SessionError::io(path, e))?;
    let schema = |message: String| SessionError::Schema {
        path: path.display().to_string(),
        message,
    };
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| schema(e.to_string()))?;
    match raw.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(schema(format!("unsupported schema_version {v}"))),
        None => return Err(schema("missing schema_version".into())),
    }
    serde_json::from_value(raw).map_err(|e| schema(e.to_string()))
}

/// Renders and writes a full two-block bundle into `out_dir`.
///
/// Stimuli are rendered in parallel; the manifest and answer key are
/// written only after every WAV is on disk.
pub fn build_session(
    participant_id: &str,
    participant_index: u32,
    seed: u64,
    config: &StimulusConfig,
    hrirs: Option<&HrirSet>,
    out_dir: &Path,
) -> Result<SessionBundle, SessionError> {
    config.validate()?;
    let items = session_items(seed);
    let order = counterbalance_order(participant_index);
    let session_id = format!("{participant_id}-{seed:016x}");

    let mut blocks = Vec::with_capacity(2);
    let mut entries = BTreeMap::new();
    let mut jobs = Vec::new();
    for method in order {
        let mut ordinals: BTreeMap<TaskKind, usize> = BTreeMap::new();
        let mut trials = Vec::with_capacity(items.len());
        for item in &items {
            let ordinal = ordinals.entry(item.task).or_insert(0);
            *ordinal += 1;
            let id = trial_id(method, item.task, *ordinal);
            let audio_file = format!("{STIMULI_DIR}/{id}.wav");
            entries.insert(
                id.clone(),
                AnswerEntry {
                    values: item.values.clone(),
                    ground_truth: item.ground_truth,
                    gap_or_interval: item.gap_or_interval,
                },
            );
            jobs.push((out_dir.join(&audio_file), method, item.values_f64()));
            trials.push(Trial {
                trial_id: id,
                task: item.task,
                audio_file,
                response_options: ResponseOptions::for_task(item.task),
            });
        }
        blocks.push(Block { method, trials });
    }

    let stimuli_dir = out_dir.join(STIMULI_DIR);
    std::fs::create_dir_all(&stimuli_dir).map_err(|e| SessionError::io(&stimuli_dir, e))?;
    jobs.par_iter()
        .try_for_each(|(path, method, values)| -> Result<(), SessionError> {
            let buf = synth::render_stimulus(values, *method, config, hrirs)?;
            synth::encode_wav(&buf, path)?;
            Ok(())
        })?;

    let manifest = SessionManifest {
        schema_version: SCHEMA_VERSION,
        session_id: session_id.clone(),
        participant_id: participant_id.to_string(),
        participant_index,
        seed,
        sample_rate: config.render.sample_rate,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        condition_order: order,
        blocks,
    };
    let key = AnswerKey {
        schema_version: SCHEMA_VERSION,
        session_id,
        entries,
    };
    write_json(&out_dir.join(ANSWER_KEY_FILE), &key)?;
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(SessionBundle {
        manifest,
        key,
        audio_files: jobs.into_iter().map(|(p, _, _)| p).collect(),
    })
}

pub fn load_bundle(dir: &Path) -> Result<(SessionManifest, AnswerKey), SessionError> {
    let manifest: SessionManifest = read_json(&dir.join(MANIFEST_FILE))?;
    let key: AnswerKey = read_json(&dir.join(ANSWER_KEY_FILE))?;
    if key.session_id != manifest.session_id {
        return Err(SessionError::SessionMismatch {
            expected: manifest.session_id,
            found: key.session_id,
        });
    }
    Ok((manifest, key))
}

/// Checks that every referenced stimulus exists and decodes at the
/// manifest's sample rate.
pub fn verify_bundle(dir: &Path, manifest: &SessionManifest) -> Result<(), SessionError> {
    for (_, trial) in manifest.trials() {
        let buf = synth::decode_wav(&dir.join(&trial.audio_file))?;
        if buf.sample_rate() != manifest.sample_rate {
            return Err(SynthError::SampleRateMismatch {
                expected: manifest.sample_rate,
                found: buf.sample_rate(),
            }
            .into());
        }
    }
    Ok(())
}

fn score_one(
    trial: &Trial,
    method: Method,
    entry: &AnswerEntry,
    record: &ResponseRecord,
) -> Result<TrialScore, SessionError> {
    let malformed = |reason: String| SessionError::MalformedResponse {
        trial_id: trial.trial_id.clone(),
        reason,
    };
    if !(record.latency_ms.is_finite() && record.latency_ms >= 0.0) {
        return Err(malformed(format!("latency_ms {} is not a duration", record.latency_ms)));
    }
    let mut score = TrialScore {
        trial_id: trial.trial_id.clone(),
        task: trial.task,
        method,
        gap_or_interval: entry.gap_or_interval,
        correct: false,
        exact_match: None,
        abs_diff: None,
        truth_value: None,
        latency_ms: record.latency_ms,
        replay_count: record.replay_count,
        timed_out: false,
    };
    if entry.ground_truth.task() != trial.task {
        return Err(malformed("answer key task does not match the manifest".into()));
    }
    if let GroundTruth::Single(truth) = entry.ground_truth {
        score.truth_value = Some(truth.exact);
        score.exact_match = Some(false);
    }
    match (&entry.ground_truth, record.response) {
        (_, ResponsePayload::Timeout) => score.timed_out = true,
        (GroundTruth::Comparison(truth), ResponsePayload::Comparison(answer)) => {
            score.correct = *truth == answer;
        }
        (GroundTruth::Trend(truth), ResponsePayload::Trend(answer)) => {
            score.correct = *truth == answer;
        }
        (GroundTruth::Single(truth), ResponsePayload::Single(answer)) => {
            if !(VALUE_MIN..=VALUE_MAX).contains(&answer.exact) {
                return Err(malformed(format!(
                    "exact value {} outside [{VALUE_MIN}, {VALUE_MAX}]",
                    answer.exact
                )));
            }
            score.correct = truth.sign == answer.sign;
            score.exact_match = Some(truth.exact == answer.exact);
            score.abs_diff = Some(truth.exact.abs_diff(answer.exact));
        }
        (truth, answer) => {
            return Err(malformed(format!(
                "{:?} payload for a {} trial",
                answer,
                truth.task().as_str()
            )))
        }
    }
    Ok(score)
}

/// One score per manifest trial, in manifest order.
pub fn score_responses(
    manifest: &SessionManifest,
    key: &AnswerKey,
    log: &ResponseLog,
) -> Result<Vec<TrialScore>, SessionError> {
    if log.session_id != manifest.session_id {
        return Err(SessionError::SessionMismatch {
            expected: manifest.session_id.clone(),
            found: log.session_id.clone(),
        });
    }
    let known: HashSet<&str> = manifest.trials().map(|(_, t)| t.trial_id.as_str()).collect();
    let mut by_id: BTreeMap<&str, &ResponseRecord> = BTreeMap::new();
    for record in &log.responses {
        if !known.contains(record.trial_id.as_str()) {
            return Err(SessionError::UnknownTrial(record.trial_id.clone()));
        }
        if by_id.insert(record.trial_id.as_str(), record).is_some() {
            return Err(SessionError::DuplicateResponse(record.trial_id.clone()));
        }
    }
    manifest
        .trials()
        .map(|(method, trial)| {
            let entry = key
                .entries
                .get(&trial.trial_id)
                .ok_or_else(|| SessionError::MissingKeyEntry(trial.trial_id.clone()))?;
            let record = by_id
                .get(trial.trial_id.as_str())
                .ok_or_else(|| SessionError::MissingResponse(trial.trial_id.clone()))?;
            score_one(trial, method, entry, record)
        })
        .collect()
}

/// A log answering every trial correctly, with zero latency.
pub fn perfect_responses(manifest: &SessionManifest, key: &AnswerKey) -> ResponseLog {
    let responses = manifest
        .trials()
        .map(|(_, t)| ResponseRecord {
            trial_id: t.trial_id.clone(),
            response: ResponsePayload::perfect(&key.entries[&t.trial_id].ground_truth),
            latency_ms: 0.0,
            replay_count: 0,
        })
        .collect();
    ResponseLog {
        schema_version: SCHEMA_VERSION,
        session_id: manifest.session_id.clone(),
        responses,
        incomplete: false,
    }
}
