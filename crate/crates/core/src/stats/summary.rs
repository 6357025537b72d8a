use serde::{Deserialize, Serialize};

use super::dist::{normal_quantile, t_quantile};
use crate::error::StatsError;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Summary of one output measure across replications.
///
/// `sd` and `half_width` are absent for a single observation, so that one
/// replication can never look like a met precision target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub half_width: Option<f64>,
    pub confidence: f64,
}

pub fn mean(sample: &[f64]) -> Option<f64> {
    if sample.is_empty() {
        return None;
    }
    Some(sample.iter().sum::<f64>() / sample.len() as f64)
}

/// Sample variance with the n-1 denominator.
pub fn variance(sample: &[f64]) -> Option<f64> {
    if sample.len() < 2 {
        return None;
    }
    let first = sample[0];
    if sample.iter().all(|&x| x == first) {
        return Some(0.0);
    }
    let m = mean(sample)?;
    let ss: f64 = sample.iter().map(|x| (x - m) * (x - m)).sum();
    Some(ss / (sample.len() - 1) as f64)
}

pub fn sd(sample: &[f64]) -> Option<f64> {
    variance(sample).map(f64::sqrt)
}

fn check_confidence(confidence: f64) {
    assert!(
        confidence > 0.0 && confidence < 1.0,
        "confidence must lie in (0, 1), got {confidence}"
    );
}

/// `t_{n-1, 1-alpha/2}` for a two-sided interval.
pub fn t_critical(n: usize, confidence: f64) -> f64 {
    check_confidence(confidence);
    t_quantile(1.0 - (1.0 - confidence) / 2.0, (n - 1) as f64)
}

pub fn half_width_from(n: usize, sd: f64, confidence: f64) -> Option<f64> {
    if n < 2 {
        return None;
    }
    if sd == 0.0 {
        return Some(0.0);
    }
    Some(t_critical(n, confidence) * sd / (n as f64).sqrt())
}

/// Confidence-interval half-width on the mean; `None` when n < 2.
pub fn half_width(sample: &[f64], confidence: f64) -> Option<f64> {
    half_width_from(sample.len(), sd(sample)?, confidence)
}

pub fn summarize(sample: &[f64]) -> Result<SummaryStats, StatsError> {
    summarize_with(sample, DEFAULT_CONFIDENCE)
}

pub fn summarize_with(sample: &[f64], confidence: f64) -> Result<SummaryStats, StatsError> {
    check_confidence(confidence);
    let n = sample.len();
    let raw_mean = mean(sample).ok_or(StatsError::EmptySample)?;
    let min = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sd = sd(sample);
    Ok(SummaryStats {
        n,
        mean: raw_mean.clamp(min, max),
        sd,
        min,
        max,
        half_width: sd.and_then(|s| half_width_from(n, s, confidence)),
        confidence,
    })
}

/// Planning estimate `ceil((z * sd / target)^2)`, at least one.
pub fn expected_replications(sd_estimate: f64, target: f64, confidence: f64) -> u64 {
    assert!(target > 0.0, "target half-width must be positive");
    check_confidence(confidence);
    if sd_estimate <= 0.0 {
        return 1;
    }
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    ((z * sd_estimate / target).powi(2).ceil() as u64).max(1)
}

/// Pilot-based variant using the t quantile at the pilot's degrees of freedom.
pub fn pilot_replications(pilot_n: usize, pilot_sd: f64, target: f64, confidence: f64) -> u64 {
    assert!(target > 0.0, "target half-width must be positive");
    if pilot_sd <= 0.0 || pilot_n < 2 {
        return expected_replications(pilot_sd, target, confidence);
    }
    let t = t_critical(pilot_n, confidence);
    ((t * pilot_sd / target).powi(2).ceil() as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_sample_has_zero_half_width() {
        assert_eq!(half_width(&[0.1, 0.1, 0.1, 0.1], 0.95), Some(0.0));
        let s = summarize(&[0.1; 7]).unwrap();
        assert_eq!(s.sd, Some(0.0));
        assert_eq!(s.mean, 0.1);
    }

    #[test]
    fn one_two_three() {
        // t_{2,0.975} = 4.302653 from tables; 4.302653 * 1 / sqrt(3)
        assert_relative_eq!(half_width(&[1.0, 2.0, 3.0], 0.95).unwrap(), 2.484138, epsilon = 1e-5);
        let s = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.n, s.mean, s.sd, s.min, s.max), (3, 2.0, Some(1.0), 1.0, 3.0));
    }

    #[test]
    fn single_observation_reports_absent_spread() {
        let s = summarize(&[5.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.sd, None);
        assert_eq!(s.half_width, None);
        assert_eq!(half_width(&[5.0], 0.95), None);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(summarize(&[]), Err(StatsError::EmptySample));
    }

    #[test]
    fn expected_replications_examples() {
        // ceil(1.959964^2) = ceil(3.8415)
        assert_eq!(expected_replications(0.5, 0.5, 0.95), 4);
        // ceil((1.959964 * 2000)^2) with the exact normal quantile
        assert_eq!(expected_replications(1000.0, 0.5, 0.95), 15_365_836);
        assert_eq!(expected_replications(0.0, 0.5, 0.95), 1);
        assert_eq!(expected_replications(1e-9, 0.5, 0.95), 1);
    }

    #[test]
    fn pilot_uses_t_quantile() {
        // t_{99, 0.975} = 1.984217
        let n = pilot_replications(100, 30.0, 0.5, 0.95);
        assert_eq!(n, ((1.984_216_951_6 * 60.0f64).powi(2)).ceil() as u64);
        let coarse = pilot_replications(100, 30.0, 5.0, 0.95);
        let ratio = n as f64 / coarse as f64;
        assert!((ratio - 100.0).abs() / 100.0 < 0.02, "{ratio}");
    }
}
