//! The sequential-sampling stopping rule: run one replication at a time and
//! stop once the confidence-interval half-width on the chosen measure is at
//! or below the target, or the replication cap is reached.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::summary::{half_width_from, DEFAULT_CONFIDENCE};
use crate::error::ConfigError;

pub const DEFAULT_REPLICATION_CAP: u64 = 999_999;
pub const DEFAULT_MIN_REPLICATIONS: u64 = 3;
pub const DEFAULT_TARGET_HALF_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequentialConfig {
    /// Target half-width, in the units of the measure.
    pub target_half_width: f64,
    pub confidence: f64,
    pub replication_cap: u64,
    pub min_replications: u64,
}

impl Default for SequentialConfig {
    fn default() -> Self {
        Self {
            target_half_width: DEFAULT_TARGET_HALF_WIDTH,
            confidence: DEFAULT_CONFIDENCE,
            replication_cap: DEFAULT_REPLICATION_CAP,
            min_replications: DEFAULT_MIN_REPLICATIONS,
        }
    }
}

impl SequentialConfig {
    pub fn with_target(target_half_width: f64) -> Self {
        Self { target_half_width, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.target_half_width > 0.0) {
            return Err(ConfigError::invalid("must be > 0").at("target_half_width"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(ConfigError::invalid("must lie in (0, 1)").at("confidence"));
        }
        if self.min_replications < 2 {
            return Err(ConfigError::invalid("must be >= 2").at("min_replications"));
        }
        if self.replication_cap < self.min_replications {
            return Err(ConfigError::invalid("must be >= min_replications").at("replication_cap"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TargetMet,
    CapReached,
    /// Fixed-replication mode ran its requested count.
    FixedCount,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::TargetMet => "target-met",
            StopReason::CapReached => "cap-reached",
            StopReason::FixedCount => "fixed-count",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "target-met" => Ok(StopReason::TargetMet),
            "cap-reached" => Ok(StopReason::CapReached),
            "fixed-count" => Ok(StopReason::FixedCount),
            other => Err(format!("unknown stop reason `{other}`")),
        }
    }
}

/// Running state: the completed-replication count and sufficient statistics
/// of the sample (Welford), so each check costs O(1).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequentialState {
    completed: u64,
    mean: f64,
    m2: f64,
}

impl SequentialState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sample(sample: &[f64]) -> Self {
        let mut s = Self::new();
        sample.iter().for_each(|&x| s.push(x));
        s
    }

    pub fn push(&mut self, x: f64) {
        self.completed += 1;
        let delta = x - self.mean;
        self.mean += delta / self.completed as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn mean(&self) -> Option<f64> {
        (self.completed > 0).then_some(self.mean)
    }

    pub fn sd(&self) -> Option<f64> {
        (self.completed >= 2).then(|| (self.m2.max(0.0) / (self.completed - 1) as f64).sqrt())
    }

    pub fn half_width(&self, confidence: f64) -> Option<f64> {
        half_width_from(self.completed as usize, self.sd()?, confidence)
    }

    /// Why the rule would stop now, or `None` to keep replicating.
    pub fn stop_reason(&self, config: &SequentialConfig) -> Option<StopReason> {
        if self.completed < config.min_replications {
            return None;
        }
        match self.half_width(config.confidence) {
            Some(hw) if hw <= config.target_half_width => Some(StopReason::TargetMet),
            _ if self.completed >= config.replication_cap => Some(StopReason::CapReached),
            _ => None,
        }
    }
}

pub fn should_continue(state: &SequentialState, config: &SequentialConfig) -> bool {
    state.stop_reason(config).is_none()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialOutcome {
    pub sample: Vec<f64>,
    pub reason: StopReason,
    pub half_width: Option<f64>,
}

/// Drives `replicate(index)` one replication at a time until the rule stops.
pub fn run_sequential<F>(config: &SequentialConfig, mut replicate: F) -> SequentialOutcome
where
    F: FnMut(u64) -> f64,
{
    let mut state = SequentialState::new();
    let mut sample = Vec::new();
    loop {
        if let Some(reason) = state.stop_reason(config) {
            return SequentialOutcome {
                sample,
                reason,
                half_width: state.half_width(config.confidence),
            };
        }
        let x = replicate(state.completed());
        sample.push(x);
        state.push(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A state with the given count whose half-width is `hw` at 95%.
    fn state_with(completed: u64, hw: f64) -> SequentialState {
        let n = completed as f64;
        let t = crate::stats::dist::t_quantile(0.975, n - 1.0);
        let sd = hw * n.sqrt() / t;
        SequentialState { completed, mean: 0.0, m2: sd * sd * (n - 1.0) }
    }

    #[test]
    fn minimum_replications_force_continuation() {
        let cfg = SequentialConfig::with_target(0.5);
        assert!(should_continue(&state_with(2, 0.1), &cfg));
        assert!(should_continue(&SequentialState::new(), &cfg));
    }

    #[test]
    fn met_target_stops() {
        let cfg = SequentialConfig::with_target(0.5);
        let s = state_with(500, 0.4);
        assert!(!should_continue(&s, &cfg));
        assert_eq!(s.stop_reason(&cfg), Some(StopReason::TargetMet));
    }

    #[test]
    fn cap_stops_even_when_target_missed() {
        let cfg = SequentialConfig::with_target(0.5);
        let s = state_with(999_999, 2.8);
        assert_eq!(s.stop_reason(&cfg), Some(StopReason::CapReached));
        assert!(should_continue(&state_with(999_998, 2.8), &cfg));
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [3.0, 7.5, 1.25, 9.0, 4.0, 4.0, 6.5];
        let s = SequentialState::from_sample(&xs);
        let sd = crate::stats::summary::sd(&xs).unwrap();
        assert!((s.sd().unwrap() - sd).abs() < 1e-12);
        assert!((s.mean().unwrap() - 5.035_714_285_714_286).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SequentialConfig::default().validate().is_ok());
        let bad = SequentialConfig { min_replications: 1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SequentialConfig { replication_cap: 2, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SequentialConfig { target_half_width: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_output_stops_at_minimum() {
        let out = run_sequential(&SequentialConfig::with_target(0.5), |_| 42.0);
        assert_eq!(out.sample.len(), 3);
        assert_eq!(out.reason, StopReason::TargetMet);
    }

    #[test]
    fn cap_is_reported() {
        let cfg = SequentialConfig { replication_cap: 10, ..SequentialConfig::with_target(1e-9) };
        let out = run_sequential(&cfg, |i| i as f64);
        assert_eq!(out.sample.len(), 10);
        assert_eq!(out.reason, StopReason::CapReached);
    }
}
