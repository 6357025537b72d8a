use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, SimError};
use crate::experiment::archive::{confidence_of, ArchiveFooter, ArchiveWriter, RunArchive, ARCHIVE_VERSION};
use crate::experiment::spec::{ExperimentSpec, RunMode};
use crate::model::{CrossdockModel, ReplicationResult};
use crate::stats::{summarize_with, SequentialState, StopReason, SummaryStats};

/// What a run produced, apart from the rows themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub completed: u64,
    pub stop_reason: StopReason,
    pub summary: Option<SummaryStats>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn console_line(&self) -> String {
        let fmt_opt = |x: Option<f64>| x.map_or_else(|| "absent".to_owned(), |v| format!("{v:.4}"));
        let (mean, hw) = match &self.summary {
            Some(s) => (format!("{:.4}", s.mean), fmt_opt(s.half_width)),
            None => ("absent".into(), "absent".into()),
        };
        format!(
            "n={} mean={} half_width={} stop_reason={} wall_time={:.3}s",
            self.completed,
            mean,
            hw,
            self.stop_reason,
            self.elapsed.as_secs_f64()
        )
    }
}

fn batch_size(workers: usize) -> u64 {
    (workers as u64 * 16).max(16)
}

/// Runs the experiment, handing each committed replication to `commit` in
/// replication-index order. Worker count never changes which replications
/// are committed.
pub fn run_with<F>(spec: &ExperimentSpec, mut commit: F) -> Result<RunReport, Error>
where
    F: FnMut(&ReplicationResult) -> Result<(), Error>,
{
    spec.validate()?;
    let start = Instant::now();
    let model = CrossdockModel::new(spec.variant, spec.model.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Runtime(e.to_string()))?;
    let seed = spec.root_seed;
    let run_batch = |from: u64, to: u64| -> Result<Vec<ReplicationResult>, SimError> {
        if spec.workers == 1 {
            (from..to).map(|i| model.run_replication(seed, i)).collect()
        } else {
            pool.install(|| (from..to).into_par_iter().map(|i| model.run_replication(seed, i)).collect())
        }
    };

    let mut costs = Vec::new();
    let stop_reason = match &spec.mode {
        RunMode::Fixed(n) => {
            let batch = batch_size(spec.workers);
            let mut next = 0;
            while next < *n {
                let to = (next + batch).min(*n);
                for r in run_batch(next, to)? {
                    commit(&r)?;
                    costs.push(r.total_usage_cost);
                }
                next = to;
            }
            StopReason::FixedCount
        }
        RunMode::Sequential(cfg) => {
            let batch = if spec.workers == 1 { 1 } else { batch_size(spec.workers) };
            let mut state = SequentialState::new();
            'outer: loop {
                if let Some(reason) = state.stop_reason(cfg) {
                    break 'outer reason;
                }
                let from = state.completed();
                let to = (from + batch).min(cfg.replication_cap);
                for r in run_batch(from, to)? {
                    if state.stop_reason(cfg).is_some() {
                        continue 'outer;
                    }
                    commit(&r)?;
                    costs.push(r.total_usage_cost);
                    state.push(r.total_usage_cost);
                }
            }
        }
    };
    Ok(RunReport {
        completed: costs.len() as u64,
        stop_reason,
        summary: summarize_with(&costs, confidence_of(spec)).ok(),
        elapsed: start.elapsed(),
    })
}

/// Runs the experiment and keeps every row in memory.
pub fn run_in_memory(spec: &ExperimentSpec) -> Result<(RunArchive, RunReport), Error> {
    let mut rows = Vec::new();
    let report = run_with(spec, |r| {
        rows.push(r.clone());
        Ok(())
    })?;
    let archive = RunArchive {
        version: ARCHIVE_VERSION.into(),
        spec: spec.clone(),
        rows,
        footer: ArchiveFooter { summary: report.summary.clone(), stop_reason: report.stop_reason },
    };
    Ok((archive, report))
}

/// Runs the experiment, streaming rows to an archive at `path`.
pub fn run_to_file(spec: &ExperimentSpec, path: &Path) -> Result<RunReport, Error> {
    let mut writer = ArchiveWriter::create(path, spec)?;
    let report = run_with(spec, |r| Ok(writer.push(r)?))?;
    writer.finish(report.stop_reason)?;
    Ok(report)
}
