use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::sim::{CostRates, ShiftSchedule};
use crate::streams::{DistributionSpec, StreamMapping};

/// Thirty 16-hour working days: 28,800 minutes.
pub const DEFAULT_REPLICATION_LENGTH: f64 = 28_800.0;

/// MIFQ, MIMQ, FIFQ, FIMQ, RIRQ.
pub const DEFAULT_ORDER_MIX: [f64; 5] = [0.20, 0.25, 0.10, 0.15, 0.30];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrderType {
    /// Many items, few quantities.
    #[serde(rename = "MIFQ")]
    Mifq,
    /// Many items, many quantities.
    #[serde(rename = "MIMQ")]
    Mimq,
    /// Few items, few quantities.
    #[serde(rename = "FIFQ")]
    Fifq,
    /// Few items, many quantities.
    #[serde(rename = "FIMQ")]
    Fimq,
    /// Regular items, regular quantities.
    #[serde(rename = "RIRQ")]
    Rirq,
}

impl OrderType {
    pub const ALL: [OrderType; 5] =
        [OrderType::Mifq, OrderType::Mimq, OrderType::Fifq, OrderType::Fimq, OrderType::Rirq];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrderType::Mifq => "MIFQ",
            OrderType::Mimq => "MIMQ",
            OrderType::Fifq => "FIFQ",
            OrderType::Fimq => "FIMQ",
            OrderType::Rirq => "RIRQ",
        }
    }
}

impl fmt::Display for OrderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Resource classes at a picking point, in routing priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResourceClass {
    Automated,
    Skilled,
    Unskilled,
}

impl ResourceClass {
    pub const PRIORITY: [ResourceClass; 3] =
        [ResourceClass::Automated, ResourceClass::Skilled, ResourceClass::Unskilled];

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceClass::Automated => "auto",
            ResourceClass::Skilled => "skilled",
            ResourceClass::Unskilled => "unskilled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Arrivals, order mix, and picking only.
    Base,
    /// Adds buffer-station processing before picking.
    Buffered,
    /// Buffered, with a dedicated stream per randomness source.
    BufferedCrn,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] =
        [ModelVariant::Base, ModelVariant::Buffered, ModelVariant::BufferedCrn];

    pub fn has_buffer(self) -> bool {
        self != ModelVariant::Base
    }

    pub fn default_mapping(self) -> StreamMapping {
        match self {
            ModelVariant::BufferedCrn => StreamMapping::Dedicated,
            _ => StreamMapping::Shared,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Base => "base",
            ModelVariant::Buffered => "buffered",
            ModelVariant::BufferedCrn => "buffered-crn",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(ModelVariant::Base),
            "buffered" => Ok(ModelVariant::Buffered),
            "buffered-crn" => Ok(ModelVariant::BufferedCrn),
            other => Err(ConfigError::invalid(format!(
                "unknown variant `{other}` (expected base, buffered, or buffered-crn)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Staffing {
    pub skilled: u32,
    pub unskilled: u32,
    pub automated: u32,
}

impl Default for Staffing {
    fn default() -> Self {
        Self { skilled: 2, unskilled: 2, automated: 1 }
    }
}

impl Staffing {
    pub fn of(&self, class: ResourceClass) -> u32 {
        match class {
            ResourceClass::Automated => self.automated,
            ResourceClass::Skilled => self.skilled,
            ResourceClass::Unskilled => self.unskilled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRates {
    pub skilled: CostRates,
    pub unskilled: CostRates,
    pub automated: CostRates,
}

impl Default for ClassRates {
    fn default() -> Self {
        let rates = |busy: f64| CostRates { busy_gbp_per_h: busy, idle_gbp_per_h: busy / 2.0, per_use_gbp: 0.0 };
        Self { skilled: rates(12.0), unskilled: rates(8.0), automated: rates(20.0) }
    }
}

impl ClassRates {
    pub fn of(&self, class: ResourceClass) -> CostRates {
        match class {
            ResourceClass::Automated => self.automated,
            ResourceClass::Skilled => self.skilled,
            ResourceClass::Unskilled => self.unskilled,
        }
    }
}

/// Breakdowns of the automated dispensers. Up-time counts on-shift minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureSpec {
    pub up_mean_min: f64,
    pub repair: DistributionSpec,
}

/// Everything that defines the order-picking model. Times are minutes,
/// money is pounds sterling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub replication_length_min: f64,
    pub picking_points: u32,
    /// Inter-arrival time; `mean = inf` disables arrivals.
    pub arrival: DistributionSpec,
    /// Fixed arrival times in minutes; replaces the `arrival` distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arrival_list: Option<Vec<f64>>,
    /// Stop creating orders after this many.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_orders: Option<u64>,
    /// Weights over MIFQ, MIMQ, FIFQ, FIMQ, RIRQ.
    pub order_mix: DistributionSpec,
    pub manual_pick: DistributionSpec,
    pub auto_dispense: DistributionSpec,
    /// Multiplies manual-pick times for unskilled operatives.
    pub unskilled_time_factor: f64,
    /// Buffer-station delay; required by the buffered variants only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_delay: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureSpec>,
    /// Overrides the variant's stream mapping.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub streams: Option<StreamMapping>,
    pub staffing: Staffing,
    pub rates: ClassRates,
    pub shifts: ShiftSchedule,
}

pub fn default_buffer_delay() -> DistributionSpec {
    DistributionSpec::Triangular { min: 0.5, mode: 1.0, max: 2.0 }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            replication_length_min: DEFAULT_REPLICATION_LENGTH,
            picking_points: 4,
            arrival: DistributionSpec::Exponential { mean: 1.0 },
            arrival_list: None,
            max_orders: None,
            order_mix: DistributionSpec::Discrete { weights: DEFAULT_ORDER_MIX.to_vec() },
            manual_pick: DistributionSpec::Triangular { min: 2.0, mode: 3.5, max: 5.0 },
            auto_dispense: DistributionSpec::Triangular { min: 0.5, mode: 1.0, max: 1.5 },
            unskilled_time_factor: 1.25,
            buffer_delay: None,
            failure: None,
            streams: None,
            staffing: Staffing::default(),
            rates: ClassRates::default(),
            shifts: ShiftSchedule::default(),
        }
    }
}

fn check_duration(spec: &DistributionSpec, key: &str) -> Result<(), ConfigError> {
    spec.validate().map_err(|e| e.at(key))?;
    match spec {
        DistributionSpec::Triangular { min, .. } if *min >= 0.0 => Ok(()),
        DistributionSpec::Triangular { .. } => {
            Err(ConfigError::invalid("durations cannot be negative").at(key))
        }
        _ => Err(ConfigError::invalid("expected a triangular distribution").at(key)),
    }
}

fn check_rates(rates: &CostRates, key: &str) -> Result<(), ConfigError> {
    for (name, v) in [
        ("busy_gbp_per_h", rates.busy_gbp_per_h),
        ("idle_gbp_per_h", rates.idle_gbp_per_h),
        ("per_use_gbp", rates.per_use_gbp),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(ConfigError::invalid("must be a finite amount >= 0").at(name).at(key));
        }
    }
    Ok(())
}

impl ModelConfig {
    /// Defaults, plus the default buffer delay when the variant needs one.
    pub fn for_variant(variant: ModelVariant) -> Self {
        Self {
            buffer_delay: variant.has_buffer().then(default_buffer_delay),
            ..Self::default()
        }
    }

    pub fn order_weights(&self) -> &[f64] {
        match &self.order_mix {
            DistributionSpec::Discrete { weights } => weights,
            _ => &[],
        }
    }

    pub fn stream_mapping(&self, variant: ModelVariant) -> StreamMapping {
        self.streams.unwrap_or(variant.default_mapping())
    }

    pub fn validate(&self, variant: ModelVariant) -> Result<(), ConfigError> {
        let len = self.replication_length_min;
        if !(len > 0.0 && len.is_finite()) {
            return Err(ConfigError::invalid("must be a positive number of minutes")
                .at("replication_length_min"));
        }
        if self.picking_points == 0 {
            return Err(ConfigError::invalid("must be >= 1").at("picking_points"));
        }
        match &self.arrival {
            DistributionSpec::Exponential { .. } => self.arrival.validate().map_err(|e| e.at("arrival"))?,
            _ => return Err(ConfigError::invalid("expected an exponential distribution").at("arrival")),
        }
        if let Some(times) = &self.arrival_list {
            let mut prev = 0.0;
            for (i, &t) in times.iter().enumerate() {
                if !(t.is_finite() && t >= prev) {
                    return Err(ConfigError::invalid(format!(
                        "entry {i}: times must be finite, >= 0, and nondecreasing"
                    ))
                    .at("arrival_list"));
                }
                prev = t;
            }
        }
        match &self.order_mix {
            DistributionSpec::Discrete { weights } if weights.len() == OrderType::ALL.len() => {
                self.order_mix.validate().map_err(|e| e.at("order_mix"))?
            }
            DistributionSpec::Discrete { weights } => {
                return Err(ConfigError::invalid(format!(
                    "expected 5 weights (MIFQ, MIMQ, FIFQ, FIMQ, RIRQ), got {}",
                    weights.len()
                ))
                .at("order_mix"))
            }
            _ => return Err(ConfigError::invalid("expected a discrete distribution").at("order_mix")),
        }
        check_duration(&self.manual_pick, "manual_pick")?;
        check_duration(&self.auto_dispense, "auto_dispense")?;
        let factor = self.unskilled_time_factor;
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(ConfigError::invalid("must be > 0").at("unskilled_time_factor"));
        }
        match (&self.buffer_delay, variant.has_buffer()) {
            (Some(spec), true) => check_duration(spec, "buffer_delay")?,
            (None, true) => {
                return Err(ConfigError::invalid(format!(
                    "variant {variant} requires a buffer_delay distribution"
                ))
                .at("buffer_delay"))
            }
            (Some(_), false) => {
                return Err(ConfigError::invalid("variant base has no buffer stage; remove buffer_delay")
                    .at("buffer_delay"))
            }
            (None, false) => {}
        }
        if let Some(f) = &self.failure {
            if !(f.up_mean_min > 0.0) {
                return Err(ConfigError::invalid("must be > 0").at("up_mean_min").at("failure"));
            }
            check_duration(&f.repair, "repair").map_err(|e| e.at("failure"))?;
        }
        if variant == ModelVariant::BufferedCrn && self.streams == Some(StreamMapping::Shared) {
            return Err(ConfigError::invalid("variant buffered-crn requires dedicated streams").at("streams"));
        }
        for class in ResourceClass::PRIORITY {
            if self.staffing.of(class) == 0 {
                return Err(ConfigError::invalid("capacity must be >= 1")
                    .at(match class {
                        ResourceClass::Automated => "automated",
                        ResourceClass::Skilled => "skilled",
                        ResourceClass::Unskilled => "unskilled",
                    })
                    .at("staffing"));
            }
        }
        check_rates(&self.rates.skilled, "skilled").map_err(|e| e.at("rates"))?;
        check_rates(&self.rates.unskilled, "unskilled").map_err(|e| e.at("rates"))?;
        check_rates(&self.rates.automated, "automated").map_err(|e| e.at("rates"))?;
        self.shifts.validate().map_err(|e| e.at("shifts"))?;
        Ok(())
    }
}
