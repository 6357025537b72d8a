use std::time::{Duration, Instant};

use crate::error::{Error, StatsError};
use crate::experiment::archive::RunArchive;
use crate::experiment::spec::ExperimentSpec;
use crate::model::CrossdockModel;
use crate::stats::summary::sd;
use crate::stats::{expected_replications, pilot_replications};

/// Replications timed to estimate the cost of one.
pub const TIMING_REPLICATIONS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SdSource {
    Given,
    Pilot { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEstimate {
    pub replications: u64,
    pub sd: f64,
    pub source: SdSource,
    pub target: f64,
    pub confidence: f64,
    pub seconds_per_replication: Option<f64>,
}

impl PlanEstimate {
    /// `z`-based estimate from a known sd.
    pub fn from_sd(sd: f64, target: f64, confidence: f64) -> Self {
        Self {
            replications: expected_replications(sd, target, confidence),
            sd,
            source: SdSource::Given,
            target,
            confidence,
            seconds_per_replication: None,
        }
    }

    /// `t`-based estimate from a pilot archive's sd.
    pub fn from_pilot(pilot: &RunArchive, target: f64, confidence: f64) -> Result<Self, StatsError> {
        let costs = pilot.costs();
        let n = costs.len();
        let sd = sd(&costs).ok_or(StatsError::TooFewObservations { needed: 2, got: n })?;
        Ok(Self {
            replications: pilot_replications(n, sd, target, confidence),
            sd,
            source: SdSource::Pilot { n },
            target,
            confidence,
            seconds_per_replication: None,
        })
    }

    pub fn wall_time(&self) -> Option<Duration> {
        self.seconds_per_replication
            .map(|s| Duration::from_secs_f64(s * self.replications as f64))
    }

    pub fn render(&self) -> String {
        let source = match self.source {
            SdSource::Given => "given sd, normal quantile".to_owned(),
            SdSource::Pilot { n } => format!("pilot of {n} replications, t quantile"),
        };
        let mut out = format!(
            "estimated replications: {}\nsd: {} ({source})\ntarget half-width: {} at {} confidence\n",
            self.replications, self.sd, self.target, self.confidence
        );
        if let (Some(per), Some(total)) = (self.seconds_per_replication, self.wall_time()) {
            out.push_str(&format!(
                "measured {:.6} s per replication; estimated wall time {:.1} s ({:.2} h) on one worker\n",
                per,
                total.as_secs_f64(),
                total.as_secs_f64() / 3600.0
            ));
        }
        out
    }
}

/// Mean wall time of one replication of `spec`'s model, measured on a few runs.
pub fn time_replication(spec: &ExperimentSpec) -> Result<f64, Error> {
    let model = CrossdockModel::new(spec.variant, spec.model.clone())?;
    let start = Instant::now();
    for i in 0..TIMING_REPLICATIONS {
        model.run_replication(spec.root_seed, i)?;
    }
    Ok(start.elapsed().as_secs_f64() / TIMING_REPLICATIONS as f64)
}
