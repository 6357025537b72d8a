//! Replication statistics: summaries with t-based half-widths, the
//! sequential stopping rule, and two-series comparisons.

pub mod compare;
pub mod dist;
pub mod sequential;
pub mod summary;

pub use compare::{
    analyser_number, paired_t_compare, variance_ratio_compare, ComparisonKind, ComparisonReport,
    SeriesExtent, Verdict,
};
pub use sequential::{
    run_sequential, should_continue, SequentialConfig, SequentialOutcome, SequentialState,
    StopReason,
};
pub use summary::{
    expected_replications, half_width, pilot_replications, summarize, summarize_with,
    SummaryStats, DEFAULT_CONFIDENCE,
};
