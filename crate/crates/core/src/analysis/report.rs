//! Accuracy tables over scored trials.
//!
//! Every table is a grouped mean of per-trial indicators. Single-value
//! trials contribute two indicators: `sign` (the sign sub-answer) and
//! `exact` (the reported value equals the truth).
//!
//! CSV output is one file of blank-line-separated sections. Each section has
//! its own header row and repeats the section name in the first column:
//!
//! | section | columns |
//! |---|---|
//! | `overall` | group, measure, method, n, correct, accuracy |
//! | `by_level` | measure, method, level, n, correct, accuracy |
//! | `by_truth` | measure, method, truth_value, n, correct, accuracy |
//! | `exact_value` | method, n, exact_match_rate, n_answered, mean_abs_diff |
//! | `paired_tests` | measure, n_participants, statistic, n_effective, p_two_sided, test_method, note |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::wilcoxon::{wilcoxon_signed_rank, TestMethod, WilcoxonResult};
use super::AnalysisError;
use crate::session::{ScoreSheet, TrialScore};
use crate::stimuli::TaskKind;
use crate::synth::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Comparison,
    Trend,
    Sign,
    Exact,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Comparison, Measure::Trend, Measure::Sign, Measure::Exact];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Comparison => "comparison",
            Measure::Trend => "trend",
            Measure::Sign => "sign",
            Measure::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

fn indicators(score: &TrialScore) -> Vec<(Measure, bool)> {
    match score.task {
        TaskKind::Comparison => vec![(Measure::Comparison, score.correct)],
        TaskKind::Trend => vec![(Measure::Trend, score.correct)],
        TaskKind::Single => vec![
            (Measure::Sign, score.correct),
            (Measure::Exact, score.exact_match.unwrap_or(false)),
        ],
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: usize,
    correct: usize,
}

impl Tally {
    fn add(&mut self, hit: bool) {
        self.n += 1;
        self.correct += usize::from(hit);
    }

    fn accuracy(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.correct as f64 / self.n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallRow {
    pub group: String,
    pub measure: Measure,
    pub method: Method,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub measure: Measure,
    pub method: Method,
    /// Comparison gap or trend interval.
    pub level: i32,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub measure: Measure,
    pub method: Method,
    pub truth_value: i32,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValueRow {
    pub method: Method,
    pub n: usize,
    pub exact_match_rate: f64,
    /// Trials with a numeric answer (timeouts excluded).
    pub n_answered: usize,
    pub mean_abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTestRow {
    pub measure: Measure,
    pub n_participants: usize,
    /// Spatial accuracies paired against pitch accuracies per participant.
    pub result: Option<WilcoxonResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub overall: Vec<OverallRow>,
    pub by_level: Vec<LevelRow>,
    pub by_truth: Vec<TruthRow>,
    pub exact_value: Vec<ExactValueRow>,
    pub paired_tests: Vec<PairedTestRow>,
}

pub fn aggregate_report(sheets: &[ScoreSheet]) -> Result<AnalysisReport, AnalysisError> {
    if sheets.iter().all(|s| s.scores.is_empty()) {
        return Err(AnalysisError::EmptyInput);
    }
    let mut overall: BTreeMap<(String, Measure, Method), Tally> = BTreeMap::new();
    let mut by_level: BTreeMap<(Measure, Method, i32), Tally> = BTreeMap::new();
    let mut by_truth: BTreeMap<(Measure, Method, i32), Tally> = BTreeMap::new();
    let mut per_participant: BTreeMap<(Measure, String), BTreeMap<Method, Tally>> = BTreeMap::new();
    let mut exact: BTreeMap<Method, (Tally, usize, u64)> = BTreeMap::new();

    for sheet in sheets {
        for score in &sheet.scores {
            for (measure, hit) in indicators(score) {
                overall
                    .entry((sheet.participant_group.clone(), measure, score.method))
                    .or_default()
                    .add(hit);
                if let Some(level) = score.gap_or_interval {
                    by_level.entry((measure, score.method, level)).or_default().add(hit);
                }
                if let Some(truth) = score.truth_value {
                    by_truth.entry((measure, score.method, truth)).or_default().add(hit);
                }
                per_participant
                    .entry((measure, sheet.participant_id.clone()))
                    .or_default()
                    .entry(score.method)
                    .or_default()
                    .add(hit);
            }
            if score.task == TaskKind::Single {
                let cell = exact.entry(score.method).or_default();
                cell.0.add(score.exact_match.unwrap_or(false));
                if let Some(d) = score.abs_diff {
                    cell.1 += 1;
                    cell.2 += u64::from(d);
                }
            }
        }
    }

    let paired_tests = Measure::ALL
        .iter()
        .filter_map(|&measure| {
            let pairs: Vec<(f64, f64)> = per_participant
                .range((measure, String::new())..)
                .take_while(|((m, _), _)| *m == measure)
                .filter_map(|(_, by_method)| {
                    let s = by_method.get(&Method::Spatial)?;
                    let p = by_method.get(&Method::Pitch)?;
                    Some((s.accuracy(), p.accuracy()))
                })
                .collect();
            if pairs.is_empty() {
                return None;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let (result, note) = match wilcoxon_signed_rank(&x, &y) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Some(PairedTestRow {
                measure,
                n_participants: pairs.len(),
                result,
                note,
            })
        })
        .collect();

    Ok(AnalysisReport {
        overall: overall
            .into_iter()
            .map(|((group, measure, method), t)| OverallRow {
                group,
                measure,
                method,
                n: t.n,
                correct: t.correct,
                accuracy: t.accuracy(),
            })
            .collect(),
        by_level: by_level
            .into_iter()
            .map(|((measure, method, level), t)| LevelRow {
                measure,
                method,
                level,
                n: t.n,
                correct: t.correct,
                accuracy: t.accuracy(),
            })
            .collect(),
        by_truth: by_truth
            .into_iter()
            .map(|((measure, method, truth_value), t)| TruthRow {
                measure,
                method,
                truth_value,
                n: t.n,
                correct: t.correct,
                accuracy: t.accuracy(),
            })
            .collect(),
        exact_value: exact
            .into_iter()
            .map(|(method, (t, answered, total))| ExactValueRow {
                method,
                n: t.n,
                exact_match_rate: t.accuracy(),
                n_answered: answered,
                mean_abs_diff: (answered > 0).then(|| total as f64 / answered as f64),
            })
            .collect(),
        paired_tests,
    })
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn section(out: &mut Vec<u8>, header: &[&str], rows: Vec<Vec<String>>) -> csv::Result<()> {
    if !out.is_empty() {
        out.push(b'\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    out.extend(w.into_inner().map_err(|e| e.into_error())?);
    Ok(())
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        let method_name = |m: Method| m.as_str().to_string();
        let written: csv::Result<()> = (|| {
            section(
                &mut out,
                &["section", "group", "measure", "method", "n", "correct", "accuracy"],
                self.overall
                    .iter()
                    .map(|r| {
                        vec![
                            "overall".into(),
                            r.group.clone(),
                            r.measure.as_str().into(),
                            method_name(r.method),
                            r.n.to_string(),
                            r.correct.to_string(),
                            r.accuracy.to_string(),
                        ]
                    })
                    .collect(),
            )?;
            section(
                &mut out,
                &["section", "measure", "method", "level", "n", "correct", "accuracy"],
                self.by_level
                    .iter()
                    .map(|r| {
                        vec![
                            "by_level".into(),
                            r.measure.as_str().into(),
                            method_name(r.method),
                            r.level.to_string(),
                            r.n.to_string(),
                            r.correct.to_string(),
                            r.accuracy.to_string(),
                        ]
                    })
                    .collect(),
            )?;
            section(
                &mut out,
                &["section", "measure", "method", "truth_value", "n", "correct", "accuracy"],
                self.by_truth
                    .iter()
                    .map(|r| {
                        vec![
                            "by_truth".into(),
                            r.measure.as_str().into(),
                            method_name(r.method),
                            r.truth_value.to_string(),
                            r.n.to_string(),
                            r.correct.to_string(),
                            r.accuracy.to_string(),
                        ]
                    })
                    .collect(),
            )?;
            section(
                &mut out,
                &["section", "method", "n", "exact_match_rate", "n_answered", "mean_abs_diff"],
                self.exact_value
                    .iter()
                    .map(|r| {
                        vec![
                            "exact_value".into(),
                            method_name(r.method),
                            r.n.to_string(),
                            r.exact_match_rate.to_string(),
                            r.n_answered.to_string(),
                            opt(r.mean_abs_diff),
                        ]
                    })
                    .collect(),
            )?;
            section(
                &mut out,
                &[
                    "section",
                    "measure",
                    "n_participants",
                    "statistic",
                    "n_effective",
                    "p_two_sided",
                    "test_method",
                    "note",
                ],
                self.paired_tests
                    .iter()
                    .map(|r| {
                        let method = r.result.map(|t| match t.method {
                            TestMethod::Exact => "exact",
                            TestMethod::NormalApprox => "normal_approx",
                        });
                        vec![
                            "paired_tests".into(),
                            r.measure.as_str().into(),
                            r.n_participants.to_string(),
                            opt(r.result.map(|t| t.statistic)),
                            opt(r.result.map(|t| t.n_effective)),
                            opt(r.result.map(|t| t.p_two_sided)),
                            opt(method),
                            r.note.clone().unwrap_or_default(),
                        ]
                    })
                    .collect(),
            )
        })();
        written.expect("writing CSV to memory cannot fail");
        String::from_utf8(out).expect("CSV output is UTF-8")
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}
