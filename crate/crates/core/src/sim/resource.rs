use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Money rates for one resource. Currency is pounds sterling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRates {
    pub busy_gbp_per_h: f64,
    pub idle_gbp_per_h: f64,
    #[serde(default)]
    pub per_use_gbp: f64,
}

/// What happened to a failure that struck a resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureOutcome {
    /// An idle unit went down now.
    Immediate,
    /// Every working unit is in service; the failure lands when one finishes.
    Deferred,
}

/// Time accounting for one resource over a replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub name: String,
    pub capacity: u32,
    /// Unit-minutes in service while on shift.
    pub busy_min: f64,
    /// Unit-minutes on shift and not in service (includes downtime).
    pub idle_min: f64,
    /// Unit-minutes in service after a shift ended.
    pub overtime_min: f64,
    /// Unit-minutes on shift: `busy_min + idle_min`.
    pub scheduled_min: f64,
    pub use_count: u64,
    pub rates: CostRates,
}

/// A capacity-constrained server that follows a shift schedule.
///
/// Units are interchangeable. Service that is still running when a shift ends
/// completes; the time past the shift end counts as overtime.
#[derive(Debug, Clone)]
pub struct Resource {
    name: String,
    capacity: u32,
    rates: CostRates,
    on_shift: bool,
    in_service: u32,
    failed: u32,
    pending_failures: u32,
    holders: Vec<u64>,
    use_count: u64,
    busy: f64,
    idle: f64,
    overtime: f64,
    last_update: f64,
}

impl Resource {
    pub fn new(name: impl Into<String>, capacity: u32, rates: CostRates, on_shift: bool) -> Self {
        assert!(capacity > 0, "resource capacity must be positive");
        Self {
            name: name.into(),
            capacity,
            rates,
            on_shift,
            in_service: 0,
            failed: 0,
            pending_failures: 0,
            holders: Vec::with_capacity(capacity as usize),
            use_count: 0,
            busy: 0.0,
            idle: 0.0,
            overtime: 0.0,
            last_update: 0.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn in_service(&self) -> u32 {
        self.in_service
    }

    pub fn failed_units(&self) -> u32 {
        self.failed
    }

    pub fn is_on_shift(&self) -> bool {
        self.on_shift
    }

    pub fn holds(&self, order: u64) -> bool {
        self.holders.contains(&order)
    }

    /// Units that could start service right now.
    pub fn available(&self) -> u32 {
        if self.on_shift {
            self.capacity - self.in_service - self.failed
        } else {
            0
        }
    }

    fn accrue(&mut self, now: f64) {
        let dt = now - self.last_update;
        debug_assert!(dt >= 0.0, "resource clock moved backwards");
        if dt > 0.0 {
            let serving = self.in_service as f64 * dt;
            if self.on_shift {
                self.busy += serving;
                self.idle += (self.capacity - self.in_service) as f64 * dt;
            } else {
                self.overtime += serving;
            }
        }
        self.last_update = now;
    }

    pub fn seize(&mut self, now: f64, order: u64) -> Result<(), SimError> {
        if self.holds(order) {
            return Err(SimError::AlreadyHolding { resource: self.name.clone(), order });
        }
        if self.available() == 0 {
            return Err(SimError::NoFreeUnit { resource: self.name.clone() });
        }
        self.accrue(now);
        self.in_service += 1;
        self.use_count += 1;
        self.holders.push(order);
        Ok(())
    }

    /// Frees the order's unit. Returns `true` when a deferred failure took
    /// that unit down instead of returning it to service.
    pub fn release(&mut self, now: f64, order: u64) -> Result<bool, SimError> {
        let pos = self
            .holders
            .iter()
            .position(|&h| h == order)
            .ok_or_else(|| SimError::NotHeld { resource: self.name.clone(), order })?;
        self.accrue(now);
        self.holders.swap_remove(pos);
        self.in_service -= 1;
        if self.pending_failures > 0 {
            self.pending_failures -= 1;
            self.failed += 1;
            return Ok(true);
        }
        Ok(false)
    }

    pub fn set_on_shift(&mut self, now: f64, on_shift: bool) {
        self.accrue(now);
        self.on_shift = on_shift;
    }

    pub fn fail_unit(&mut self, now: f64) -> FailureOutcome {
        self.accrue(now);
        if self.capacity - self.in_service - self.failed > 0 {
            self.failed += 1;
            FailureOutcome::Immediate
        } else {
            self.pending_failures += 1;
            FailureOutcome::Deferred
        }
    }

    pub fn repair_unit(&mut self, now: f64) {
        self.accrue(now);
        debug_assert!(self.failed > 0, "repair without a failed unit");
        self.failed = self.failed.saturating_sub(1);
    }

    /// Busy fraction of scheduled time so far.
    pub fn utilization(&self) -> Option<f64> {
        let scheduled = self.busy + self.idle;
        (scheduled > 0.0).then(|| self.busy / scheduled)
    }

    /// Closes the accounts at `end` and returns the usage record.
    pub fn finish(&mut self, end: f64) -> UsageRecord {
        self.accrue(end);
        UsageRecord {
            name: self.name.clone(),
            capacity: self.capacity,
            busy_min: self.busy,
            idle_min: self.idle,
            overtime_min: self.overtime,
            scheduled_min: self.busy + self.idle,
            use_count: self.use_count,
            rates: self.rates,
        }
    }
}

/// FIFO line of waiting orders with time-weighted length statistics.
#[derive(Debug, Clone, Default)]
pub struct WaitQueue {
    items: VecDeque<(u64, f64)>,
    area: f64,
    last_change: f64,
    max_len: usize,
    total_wait: f64,
    served: u64,
}

impl WaitQueue {
    pub fn new() -> Self {
        Self::default()
    }

    fn accrue(&mut self, now: f64) {
        self.area += self.items.len() as f64 * (now - self.last_change);
        self.last_change = now;
    }

    pub fn push(&mut self, now: f64, order: u64) {
        self.accrue(now);
        self.items.push_back((order, now));
        self.max_len = self.max_len.max(self.items.len());
    }

    /// Removes the head, recording its wait.
    pub fn pop(&mut self, now: f64) -> Option<u64> {
        self.accrue(now);
        let (order, since) = self.items.pop_front()?;
        self.total_wait += now - since;
        self.served += 1;
        Some(order)
    }

    /// Records an order that started service without waiting.
    pub fn record_no_wait(&mut self) {
        self.served += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn served(&self) -> u64 {
        self.served
    }

    pub fn total_wait(&self) -> f64 {
        self.total_wait
    }

    /// Time-average length over `[0, end]`.
    pub fn mean_len(&mut self, end: f64) -> f64 {
        self.accrue(end);
        if end > 0.0 {
            self.area / end
        } else {
            0.0
        }
    }
}
