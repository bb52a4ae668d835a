//! Scoring aggregates and nonparametric tests.

pub mod report;
pub mod wilcoxon;

use thiserror::Error;

pub use report::{aggregate_report, AnalysisReport, Measure, ReportFormat};
pub use wilcoxon::{wilcoxon_rank_sum, wilcoxon_signed_rank, TestMethod, WilcoxonResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no scores to analyze")]
    EmptyInput,
    #[error("paired samples differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("every paired difference is zero")]
    AllZeroDifferences,
    #[error("each group needs at least one observation")]
    EmptyGroup,
    #[error("non-finite observation")]
    NonFinite,
}
