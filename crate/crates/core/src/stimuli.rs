//! Seeded study datasets for the comparison, trend and single-value tasks.
//!
//! Each generator draws from its own [`SplitMix64`] stream, seeded with the
//! caller's seed XOR a per-task constant, so the three datasets are
//! independent while all flowing from one session seed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

pub const VALUE_MIN: i32 = -10;
pub const VALUE_MAX: i32 = 10;
pub const COMPARISON_GAPS: [i32; 4] = [0, 3, 6, 9];
pub const TREND_INTERVALS: [i32; 3] = [3, 6, 9];
pub const PAIRS_PER_GAP: usize = 3;

const COMPARISON_SALT: u64 = 0xC0A1_7A15_0000_0001;
const TREND_SALT: u64 = 0x7E1D_5E75_0000_0002;
const SINGLE_SALT: u64 = 0x5146_1E00_0000_0003;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StimuliError {
    #[error("values {0:?} do not form one of the four trend shapes")]
    NoTrend(Vec<i32>),
    #[error("expected {expected} values, got {found}")]
    WrongLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Comparison,
    Trend,
    /// Sign and exact-value identification share these stimuli.
    Single,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Comparison => "comparison",
            TaskKind::Trend => "trend",
            TaskKind::Single => "single",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendType {
    Increasing,
    Decreasing,
    IncThenDec,
    DecThenInc,
}

impl TrendType {
    pub const ALL: [TrendType; 4] = [
        TrendType::Increasing,
        TrendType::Decreasing,
        TrendType::IncThenDec,
        TrendType::DecThenInc,
    ];

    pub fn is_monotone(&self) -> bool {
        matches!(self, TrendType::Increasing | TrendType::Decreasing)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TrendType::Increasing => "increasing",
            TrendType::Decreasing => "decreasing",
            TrendType::IncThenDec => "inc_then_dec",
            TrendType::DecThenInc => "dec_then_inc",
        }
    }
}

/// Which of two values is greater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonAnswer {
    First,
    Second,
    Equal,
}

impl ComparisonAnswer {
    pub fn of(first: i32, second: i32) -> Self {
        match first.cmp(&second) {
            std::cmp::Ordering::Greater => ComparisonAnswer::First,
            std::cmp::Ordering::Less => ComparisonAnswer::Second,
            std::cmp::Ordering::Equal => ComparisonAnswer::Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(v: i32) -> Self {
        match v.signum() {
            1 => Sign::Positive,
            -1 => Sign::Negative,
            _ => Sign::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleTruth {
    pub sign: Sign,
    pub exact: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruth {
    Comparison(ComparisonAnswer),
    Trend(TrendType),
    Single(SingleTruth),
}

impl GroundTruth {
    pub fn task(&self) -> TaskKind {
        match self {
            GroundTruth::Comparison(_) => TaskKind::Comparison,
            GroundTruth::Trend(_) => TaskKind::Trend,
            GroundTruth::Single(_) => TaskKind::Single,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusItem {
    pub task: TaskKind,
    pub values: Vec<i32>,
    pub gap_or_interval: Option<i32>,
    pub ground_truth: GroundTruth,
}

impl StimulusItem {
    pub fn comparison(first: i32, second: i32) -> Self {
        Self {
            task: TaskKind::Comparison,
            values: vec![first, second],
            gap_or_interval: Some((first - second).abs()),
            ground_truth: GroundTruth::Comparison(ComparisonAnswer::of(first, second)),
        }
    }

    pub fn trend(values: Vec<i32>) -> Result<Self, StimuliError> {
        let shape = classify_trend(&values)?;
        Ok(Self {
            task: TaskKind::Trend,
            gap_or_interval: Some((values[1] - values[0]).abs()),
            values,
            ground_truth: GroundTruth::Trend(shape),
        })
    }

    pub fn single(v: i32) -> Self {
        Self {
            task: TaskKind::Single,
            values: vec![v],
            gap_or_interval: None,
            ground_truth: GroundTruth::Single(SingleTruth {
                sign: Sign::of(v),
                exact: v,
            }),
        }
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

pub fn classify_trend(values: &[i32]) -> Result<TrendType, StimuliError> {
    if values.len() != 5 {
        return Err(StimuliError::WrongLength {
            expected: 5,
            found: values.len(),
        });
    }
    let signs: Vec<i32> = values.windows(2).map(|w| (w[1] - w[0]).signum()).collect();
    match signs.as_slice() {
        [1, 1, 1, 1] => Ok(TrendType::Increasing),
        [-1, -1, -1, -1] => Ok(TrendType::Decreasing),
        [1, 1, -1, -1] => Ok(TrendType::IncThenDec),
        [-1, -1, 1, 1] => Ok(TrendType::DecThenInc),
        _ => Err(StimuliError::NoTrend(values.to_vec())),
    }
}

/// Adjacent-step signs for a trend shape.
fn step_signs(shape: TrendType) -> [i32; 4] {
    match shape {
        TrendType::Increasing => [1, 1, 1, 1],
        TrendType::Decreasing => [-1, -1, -1, -1],
        TrendType::IncThenDec => [1, 1, -1, -1],
        TrendType::DecThenInc => [-1, -1, 1, 1],
    }
}

/// Five values starting at `first` with the given shape and step size.
pub fn trend_values(first: i32, shape: TrendType, interval: i32) -> Vec<i32> {
    let mut values = vec![first];
    for s in step_signs(shape) {
        let last = *values.last().expect("non-empty");
        values.push(last + s * interval);
    }
    values
}

/// Inclusive range of first values that keep the whole trend in bounds.
pub fn trend_start_window(shape: TrendType, interval: i32) -> (i32, i32) {
    let offsets = trend_values(0, shape, interval);
    let lo = *offsets.iter().min().expect("non-empty");
    let hi = *offsets.iter().max().expect("non-empty");
    (VALUE_MIN - lo, VALUE_MAX - hi)
}

/// Twelve comparison pairs, three for each gap in {0, 3, 6, 9}.
///
/// Within a gap the lower values are distinct draws from the feasible
/// window, and the greater value lands first or second by a fair coin. The
/// full list is then shuffled.
pub fn gen_comparison_pairs(seed: u64) -> Vec<StimulusItem> {
    let mut rng = SplitMix64::new(seed ^ COMPARISON_SALT);
    let mut items = Vec::with_capacity(COMPARISON_GAPS.len() * PAIRS_PER_GAP);
    for gap in COMPARISON_GAPS {
        let lows = rng.distinct_in_range(i64::from(VALUE_MIN), i64::from(VALUE_MAX - gap), PAIRS_PER_GAP);
        for low in lows {
            let low = low as i32;
            let high = low + gap;
            let item = if rng.coin() {
                StimulusItem::comparison(high, low)
            } else {
                StimulusItem::comparison(low, high)
            };
            items.push(item);
        }
    }
    rng.shuffle(&mut items);
    items
}

/// Twelve five-value trend sets.
///
/// Interval 3 gets one set of each shape. Intervals 6 and 9 get two
/// peaked and two valley sets each, since a monotone run of four such steps
/// does not fit in the value range. Turning points sit at the middle value,
/// and sets sharing a shape and interval start at distinct values.
pub fn gen_trend_sets(seed: u64) -> Vec<StimulusItem> {
    let mut rng = SplitMix64::new(seed ^ TREND_SALT);
    let plan: [(i32, TrendType, usize); 6] = [
        (3, TrendType::Increasing, 1),
        (3, TrendType::Decreasing, 1),
        (3, TrendType::IncThenDec, 1),
        (3, TrendType::DecThenInc, 1),
        (6, TrendType::IncThenDec, 2),
        (6, TrendType::DecThenInc, 2),
    ];
    let nine = [(9, TrendType::IncThenDec, 2), (9, TrendType::DecThenInc, 2)];
    let mut items = Vec::with_capacity(12);
    for (interval, shape, count) in plan.into_iter().chain(nine) {
        let (lo, hi) = trend_start_window(shape, interval);
        for first in rng.distinct_in_range(i64::from(lo), i64::from(hi), count) {
            let values = trend_values(first as i32, shape, interval);
            items.push(StimulusItem::trend(values).expect("generated trends are well-formed"));
        }
    }
    rng.shuffle(&mut items);
    items
}

/// Every integer in [-10, 10] exactly once, in seeded order.
pub fn gen_single_values(seed: u64) -> Vec<StimulusItem> {
    let mut rng = SplitMix64::new(seed ^ SINGLE_SALT);
    let mut values: Vec<i32> = (VALUE_MIN..=VALUE_MAX).collect();
    rng.shuffle(&mut values);
    values.into_iter().map(StimulusItem::single).collect()
}
