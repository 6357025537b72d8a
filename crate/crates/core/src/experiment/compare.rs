use crate::error::StatsError;
use crate::experiment::archive::RunArchive;
use crate::stats::{paired_t_compare, variance_ratio_compare, ComparisonKind, ComparisonReport};

pub const MEASURE_IDENTIFIER: &str = "Total Usage Cost";

/// Compares Total Usage Cost between two archives. Means are paired by
/// replication index, so both archives need the same row count.
pub fn compare_archives(
    a: &RunArchive,
    b: &RunArchive,
    alpha: f64,
    kind: ComparisonKind,
) -> Result<ComparisonReport, StatsError> {
    let (xa, xb) = (a.costs(), b.costs());
    match kind {
        ComparisonKind::Means => paired_t_compare(MEASURE_IDENTIFIER, &xa, &xb, alpha),
        ComparisonKind::Variances => variance_ratio_compare(MEASURE_IDENTIFIER, &xa, &xb, alpha),
    }
}
