//! Seedable random-number streams with one dedicated substream per source of
//! model randomness, and the inverse-CDF samplers drawn from them.
//!
//! Every sampler consumes exactly one uniform per call. Two model variants
//! that share a stream therefore see identical uniform sequences per source
//! even when the distribution parameters differ, which is what keeps common
//! random numbers synchronized.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Root seed used when the configuration does not name one.
pub const DEFAULT_ROOT_SEED: u64 = 12345;

/// Absolute tolerance on the sum of discrete weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// A source of model randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamName {
    Arrivals,
    OrderTypeMix,
    /// Companion of `OrderTypeMix`: assigns orders to picking points.
    Routing,
    ManualPick,
    AutoDispense,
    Buffer,
    Failure,
}

impl StreamName {
    pub const ALL: [StreamName; 7] = [
        StreamName::Arrivals,
        StreamName::OrderTypeMix,
        StreamName::Routing,
        StreamName::ManualPick,
        StreamName::AutoDispense,
        StreamName::Buffer,
        StreamName::Failure,
    ];

    fn code(self) -> u64 {
        self as u64
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StreamName::Arrivals => "arrivals",
            StreamName::OrderTypeMix => "order-type-mix",
            StreamName::Routing => "routing",
            StreamName::ManualPick => "manual-pick",
            StreamName::AutoDispense => "auto-dispense",
            StreamName::Buffer => "buffer",
            StreamName::Failure => "failure",
        }
    }
}

impl fmt::Display for StreamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identifies one substream: a randomness source within one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub name: StreamName,
    pub replication: u64,
}

impl StreamId {
    pub fn new(name: StreamName, replication: u64) -> Self {
        Self { name, replication }
    }

    // Eight slots per replication leaves room for one more source.
    fn chacha_stream(self) -> u64 {
        assert!(
            self.replication < (1 << 61),
            "replication index {} out of range",
            self.replication
        );
        (self.replication << 3) | self.name.code()
    }
}

/// Anything that yields uniforms on [0, 1).
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// A single-owner generator positioned on one substream.
///
/// Backed by ChaCha8 keyed by the root seed, with the 64-bit ChaCha stream
/// selector carrying the (replication, source) pair. Substreams are therefore
/// a pure function of `(root_seed, id)`, independent of how much any other
/// substream has been consumed.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    draws: u64,
}

impl Stream {
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

impl UniformSource for Stream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        self.draws += 1;
        // 53 random mantissa bits, so the result lies in [0, 1).
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn substream(root_seed: u64, id: StreamId) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(id.chacha_stream());
    Stream { rng, draws: 0 }
}

/// How the model's randomness sources map onto substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamMapping {
    /// Every source draws from one substream (naive seeding).
    #[default]
    Shared,
    /// Each source owns its substream (common random numbers).
    Dedicated,
}

/// The substreams for one replication.
#[derive(Debug, Clone)]
pub struct StreamSet {
    mapping: StreamMapping,
    streams: Vec<Stream>,
}

impl StreamSet {
    pub fn new(root_seed: u64, replication: u64, mapping: StreamMapping) -> Self {
        let streams = match mapping {
            StreamMapping::Shared => {
                vec![substream(root_seed, StreamId::new(StreamName::Arrivals, replication))]
            }
            StreamMapping::Dedicated => StreamName::ALL
                .iter()
                .map(|&name| substream(root_seed, StreamId::new(name, replication)))
                .collect(),
        };
        Self { mapping, streams }
    }

    pub fn mapping(&self) -> StreamMapping {
        self.mapping
    }

    pub fn get(&mut self, name: StreamName) -> &mut Stream {
        match self.mapping {
            StreamMapping::Shared => &mut self.streams[0],
            StreamMapping::Dedicated => &mut self.streams[name.code() as usize],
        }
    }

    /// Substream ids in use, in source order.
    pub fn ids(&self, replication: u64) -> Vec<StreamId> {
        match self.mapping {
            StreamMapping::Shared => vec![StreamId::new(StreamName::Arrivals, replication)],
            StreamMapping::Dedicated => StreamName::ALL
                .iter()
                .map(|&n| StreamId::new(n, replication))
                .collect(),
        }
    }
}

/// A parametric distribution. Times are in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionSpec {
    /// `mean = inf` disables the source.
    Exponential { mean: f64 },
    Triangular { min: f64, mode: f64, max: f64 },
    Discrete { weights: Vec<f64> },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            DistributionSpec::Exponential { mean } => {
                if mean.is_nan() || *mean <= 0.0 {
                    return Err(ConfigError::invalid(format!(
                        "exponential mean must be > 0, got {mean}"
                    )));
                }
            }
            DistributionSpec::Triangular { min, mode, max } => {
                if ![min, mode, max].iter().all(|v| v.is_finite()) {
                    return Err(ConfigError::invalid("triangular parameters must be finite"));
                }
                if !(min <= mode && mode <= max && min < max) {
                    return Err(ConfigError::invalid(format!(
                        "triangular requires min <= mode <= max and min < max, got ({min}, {mode}, {max})"
                    )));
                }
            }
            DistributionSpec::Discrete { weights } => validate_weights(weights)?,
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Exponential { mean } => *mean,
            DistributionSpec::Triangular { min, mode, max } => (min + mode + max) / 3.0,
            DistributionSpec::Discrete { weights } => {
                weights.iter().enumerate().map(|(i, w)| i as f64 * w).sum()
            }
        }
    }

    /// Draws one value using exactly one uniform.
    pub fn sample<S: UniformSource + ?Sized>(&self, stream: &mut S) -> f64 {
        match self {
            DistributionSpec::Exponential { mean } => sample_exponential(stream, *mean),
            DistributionSpec::Triangular { min, mode, max } => {
                sample_triangular(stream, *min, *mode, *max)
            }
            DistributionSpec::Discrete { weights } => sample_discrete(stream, weights) as f64,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-x / mean).exp()
                }
            }
            DistributionSpec::Triangular { min, mode, max } => triangular_cdf(x, *min, *mode, *max),
            DistributionSpec::Discrete { weights } => {
                if x < 0.0 {
                    return 0.0;
                }
                let k = x.floor() as usize;
                weights.iter().take(k + 1).sum::<f64>().min(1.0)
            }
        }
    }
}

pub fn validate_weights(weights: &[f64]) -> Result<(), ConfigError> {
    if weights.is_empty() {
        return Err(ConfigError::invalid("discrete weights must be nonempty"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(ConfigError::invalid("discrete weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ConfigError::invalid(format!(
            "discrete weights must sum to 1, got {total}"
        )));
    }
    Ok(())
}

#[inline]
pub fn exponential_from_uniform(u: f64, mean: f64) -> f64 {
    -mean * (1.0 - u).ln()
}

#[inline]
pub fn sample_exponential<S: UniformSource + ?Sized>(stream: &mut S, mean: f64) -> f64 {
    exponential_from_uniform(stream.next_uniform(), mean)
}

pub fn triangular_from_uniform(u: f64, min: f64, mode: f64, max: f64) -> f64 {
    let span = max - min;
    let split = (mode - min) / span;
    if u < split {
        min + (u * span * (mode - min)).sqrt()
    } else {
        max - ((1.0 - u) * span * (max - mode)).sqrt()
    }
}

#[inline]
pub fn sample_triangular<S: UniformSource + ?Sized>(
    stream: &mut S,
    min: f64,
    mode: f64,
    max: f64,
) -> f64 {
    triangular_from_uniform(stream.next_uniform(), min, mode, max)
}

pub fn triangular_cdf(x: f64, min: f64, mode: f64, max: f64) -> f64 {
    if x <= min {
        0.0
    } else if x >= max {
        1.0
    } else if x <= mode {
        (x - min).powi(2) / ((max - min) * (mode - min))
    } else {
        1.0 - (max - x).powi(2) / ((max - min) * (max - mode))
    }
}

pub fn discrete_from_uniform(u: f64, weights: &[f64]) -> usize {
    let mut cumulative = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            return i;
        }
    }
    // Rounding left the cumulative sum just below u.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[inline]
pub fn sample_discrete<S: UniformSource + ?Sized>(stream: &mut S, weights: &[f64]) -> usize {
    discrete_from_uniform(stream.next_uniform(), weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Fixed(Vec<f64>);

    impl UniformSource for Fixed {
        fn next_uniform(&mut self) -> f64 {
            self.0.remove(0)
        }
    }

    #[test]
    fn same_id_replays_identically() {
        let id = StreamId::new(StreamName::Arrivals, 0);
        let mut a = substream(DEFAULT_ROOT_SEED, id);
        let mut b = substream(DEFAULT_ROOT_SEED, id);
        for _ in 0..1000 {
            assert_eq!(a.next_uniform().to_bits(), b.next_uniform().to_bits());
        }
    }

    #[test]
    fn replications_get_different_sequences() {
        let mut a = substream(DEFAULT_ROOT_SEED, StreamId::new(StreamName::Arrivals, 0));
        let mut b = substream(DEFAULT_ROOT_SEED, StreamId::new(StreamName::Arrivals, 1));
        let xs: Vec<f64> = (0..16).map(|_| a.next_uniform()).collect();
        let ys: Vec<f64> = (0..16).map(|_| b.next_uniform()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn consuming_one_source_leaves_others_untouched() {
        let mut fresh = StreamSet::new(7, 3, StreamMapping::Dedicated);
        let mut used = StreamSet::new(7, 3, StreamMapping::Dedicated);
        for _ in 0..500 {
            used.get(StreamName::Arrivals).next_uniform();
        }
        for _ in 0..100 {
            assert_eq!(
                fresh.get(StreamName::ManualPick).next_uniform(),
                used.get(StreamName::ManualPick).next_uniform()
            );
        }
    }

    #[test]
    fn shared_mapping_routes_everything_to_one_stream() {
        let mut set = StreamSet::new(1, 0, StreamMapping::Shared);
        set.get(StreamName::Buffer).next_uniform();
        set.get(StreamName::Failure).next_uniform();
        assert_eq!(set.get(StreamName::Arrivals).draws(), 2);
        assert_eq!(set.ids(0).len(), 1);
    }

    #[test]
    fn exponential_inverse_cdf_values() {
        assert_eq!(exponential_from_uniform(0.0, 10.0), 0.0);
        // -10 ln 0.5
        assert_relative_eq!(exponential_from_uniform(0.5, 10.0), 6.931_471_805_599_453, epsilon = 1e-12);
    }

    #[test]
    fn triangular_inverse_cdf_values() {
        assert_eq!(triangular_from_uniform(0.5, 0.0, 1.0, 2.0), 1.0);
        assert_eq!(triangular_from_uniform(0.0, 2.0, 3.5, 5.0), 2.0);
        let hi = triangular_from_uniform(1.0 - f64::EPSILON, 2.0, 3.5, 5.0);
        assert!(hi <= 5.0 && hi > 4.99);
        // Right-skewed and left-degenerate shapes stay in range.
        for &u in &[0.0, 0.1, 0.5, 0.9, 0.999_999] {
            let x = triangular_from_uniform(u, 0.0, 0.0, 1.0);
            assert!((0.0..=1.0).contains(&x));
            let y = triangular_from_uniform(u, 0.0, 1.0, 1.0);
            assert!((0.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn triangular_cdf_inverts_sampler() {
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let x = triangular_from_uniform(u, 0.5, 1.0, 2.0);
            assert_relative_eq!(triangular_cdf(x, 0.5, 1.0, 2.0), u, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let spec = DistributionSpec::Triangular { min: 5.0, mode: 5.0, max: 5.0 };
        assert!(spec.validate().is_err());
        let spec = DistributionSpec::Triangular { min: 1.0, mode: 3.0, max: 2.0 };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn exponential_validation() {
        assert!(DistributionSpec::Exponential { mean: 0.0 }.validate().is_err());
        assert!(DistributionSpec::Exponential { mean: -1.0 }.validate().is_err());
        assert!(DistributionSpec::Exponential { mean: f64::INFINITY }.validate().is_ok());
    }

    #[test]
    fn discrete_weights_validation() {
        assert!(validate_weights(&[1.0]).is_ok());
        assert!(validate_weights(&[0.5, 0.5 + 5e-10]).is_ok());
        assert!(validate_weights(&[0.5, 0.6]).is_err());
        assert!(validate_weights(&[1.5, -0.5]).is_err());
        assert!(validate_weights(&[]).is_err());
    }

    #[test]
    fn discrete_single_weight_always_zero() {
        let mut s = substream(3, StreamId::new(StreamName::OrderTypeMix, 0));
        assert!((0..1000).all(|_| sample_discrete(&mut s, &[1.0]) == 0));
    }

    #[test]
    fn discrete_even_split_hits_both() {
        let mut s = substream(3, StreamId::new(StreamName::OrderTypeMix, 0));
        let hits: Vec<usize> = (0..100).map(|_| sample_discrete(&mut s, &[0.5, 0.5])).collect();
        assert!(hits.contains(&0) && hits.contains(&1));
    }

    #[test]
    fn discrete_boundary_goes_to_next_bucket() {
        let w = [0.2, 0.25, 0.1, 0.15, 0.3];
        assert_eq!(discrete_from_uniform(0.0, &w), 0);
        assert_eq!(discrete_from_uniform(0.2, &w), 1);
        assert_eq!(discrete_from_uniform(0.999_999_999, &w), 4);
        // Zero-weight tail is never chosen by the rounding fallback.
        assert_eq!(discrete_from_uniform(1.0, &[0.5, 0.5, 0.0]), 1);
    }

    #[test]
    fn one_uniform_per_sample() {
        let mut s = Fixed(vec![0.3, 0.6, 0.9]);
        let e = DistributionSpec::Exponential { mean: 2.0 }.sample(&mut s);
        let t = DistributionSpec::Triangular { min: 0.0, mode: 1.0, max: 2.0 }.sample(&mut s);
        let d = DistributionSpec::Discrete { weights: vec![0.5, 0.5] }.sample(&mut s);
        assert_relative_eq!(e, exponential_from_uniform(0.3, 2.0));
        assert_relative_eq!(t, triangular_from_uniform(0.6, 0.0, 1.0, 2.0));
        assert_eq!(d, 1.0);
        assert!(s.0.is_empty());
    }

    #[test]
    fn sample_means_match_analytic() {
        let n = 1_000_000;
        let mut s = substream(DEFAULT_ROOT_SEED, StreamId::new(StreamName::ManualPick, 0));
        let exp_mean = (0..n).map(|_| sample_exponential(&mut s, 10.0)).sum::<f64>() / n as f64;
        assert!((exp_mean - 10.0).abs() / 10.0 < 0.01, "{exp_mean}");
        let tri_mean =
            (0..n).map(|_| sample_triangular(&mut s, 2.0, 3.5, 5.0)).sum::<f64>() / n as f64;
        assert!((tri_mean - 3.5).abs() / 3.5 < 0.01, "{tri_mean}");
    }
}
