use serde::{Deserialize, Serialize};

use crate::sim::UsageRecord;

/// Cost of one resource: busy and overtime minutes at the busy rate, idle
/// minutes at the idle rate, plus a charge per use.
pub fn usage_cost(rec: &UsageRecord) -> f64 {
    let r = &rec.rates;
    r.busy_gbp_per_h * (rec.busy_min + rec.overtime_min) / 60.0
        + r.idle_gbp_per_h * rec.idle_min / 60.0
        + r.per_use_gbp * rec.use_count as f64
}

/// Per-resource time accounting for one replication.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageLedger {
    pub records: Vec<UsageRecord>,
}

impl UsageLedger {
    /// Total resource usage cost in pounds.
    pub fn total_cost(&self) -> f64 {
        self.records.iter().map(usage_cost).sum()
    }

    pub fn get(&self, name: &str) -> Option<&UsageRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn busy_min(&self) -> f64 {
        self.records.iter().map(|r| r.busy_min).sum()
    }

    pub fn idle_min(&self) -> f64 {
        self.records.iter().map(|r| r.idle_min).sum()
    }

    pub fn scheduled_min(&self) -> f64 {
        self.records.iter().map(|r| r.scheduled_min).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::CostRates;

    fn record(busy: f64, idle: f64, overtime: f64, uses: u64, rates: CostRates) -> UsageRecord {
        UsageRecord {
            name: "r".into(),
            capacity: 1,
            busy_min: busy,
            idle_min: idle,
            overtime_min: overtime,
            scheduled_min: busy + idle,
            use_count: uses,
            rates,
        }
    }

    #[test]
    fn one_busy_hour_at_twenty() {
        let rates = CostRates { busy_gbp_per_h: 20.0, idle_gbp_per_h: 10.0, per_use_gbp: 0.0 };
        assert_eq!(usage_cost(&record(60.0, 0.0, 0.0, 3, rates)), 20.0);
    }

    #[test]
    fn busy_idle_and_per_use_add_up() {
        let rates = CostRates { busy_gbp_per_h: 40.0, idle_gbp_per_h: 20.0, per_use_gbp: 2.5 };
        // 90 busy (30 of it overtime) = 60, 30 idle = 10, 4 uses = 10
        let ledger = UsageLedger { records: vec![record(60.0, 30.0, 30.0, 4, rates)] };
        assert_eq!(ledger.total_cost(), 80.0);
    }
}
