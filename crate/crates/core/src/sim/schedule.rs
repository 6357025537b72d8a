use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const DEFAULT_DAY_LENGTH: f64 = 1440.0;

/// One on-shift window, in minutes from the start of the day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftWindow {
    pub start_min: f64,
    pub duration_min: f64,
}

/// A repeating daily pattern of on-shift windows.
///
/// Windows are half-open `[start, start + duration)`. Adjacent windows merge,
/// so two back-to-back 8-hour shifts form one 16-hour availability block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSchedule {
    pub day_length_min: f64,
    pub windows: Vec<ShiftWindow>,
}

impl Default for ShiftSchedule {
    /// Two 8-hour shifts, 06:00-14:00 and 14:00-22:00.
    fn default() -> Self {
        Self {
            day_length_min: DEFAULT_DAY_LENGTH,
            windows: vec![
                ShiftWindow { start_min: 360.0, duration_min: 480.0 },
                ShiftWindow { start_min: 840.0, duration_min: 480.0 },
            ],
        }
    }
}

impl ShiftSchedule {
    /// Always on shift.
    pub fn continuous() -> Self {
        Self {
            day_length_min: DEFAULT_DAY_LENGTH,
            windows: vec![ShiftWindow { start_min: 0.0, duration_min: DEFAULT_DAY_LENGTH }],
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.day_length_min > 0.0 && self.day_length_min.is_finite()) {
            return Err(ConfigError::invalid("must be a positive number of minutes").at("day_length_min"));
        }
        let mut prev_end = 0.0;
        for (i, w) in self.windows.iter().enumerate() {
            let key = format!("windows[{i}]");
            if !(w.duration_min > 0.0) {
                return Err(ConfigError::invalid("duration must be > 0").at(&key));
            }
            if !(w.start_min >= 0.0 && w.start_min + w.duration_min <= self.day_length_min) {
                return Err(ConfigError::invalid("window must lie within one day").at(&key));
            }
            if w.start_min < prev_end {
                return Err(ConfigError::invalid("windows must be ordered and disjoint").at(&key));
            }
            prev_end = w.start_min + w.duration_min;
        }
        Ok(())
    }

    pub fn on_shift_per_day(&self) -> f64 {
        self.windows.iter().map(|w| w.duration_min).sum()
    }

    /// Windows with touching neighbours merged.
    fn blocks(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in &self.windows {
            let (s, e) = (w.start_min, w.start_min + w.duration_min);
            match out.last_mut() {
                Some(last) if last.1 == s => last.1 = e,
                _ => out.push((s, e)),
            }
        }
        out
    }

    fn wraps(&self, blocks: &[(f64, f64)]) -> bool {
        match (blocks.first(), blocks.last()) {
            (Some(first), Some(last)) => first.0 == 0.0 && last.1 == self.day_length_min,
            _ => false,
        }
    }

    /// Offsets within a day where availability flips.
    fn change_points(&self) -> Vec<f64> {
        let blocks = self.blocks();
        let wraps = self.wraps(&blocks);
        let mut points = Vec::new();
        for &(s, e) in &blocks {
            if !(wraps && s == 0.0) {
                points.push(s);
            }
            if !(wraps && e == self.day_length_min) {
                points.push(e % self.day_length_min);
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    fn split(&self, t: f64) -> (f64, f64) {
        let day = (t / self.day_length_min).floor();
        (day, t - day * self.day_length_min)
    }

    pub fn is_on_shift(&self, t: f64) -> bool {
        let (_, offset) = self.split(t);
        self.windows
            .iter()
            .any(|w| w.start_min <= offset && offset < w.start_min + w.duration_min)
    }

    /// First time strictly after `t` at which availability flips.
    pub fn next_change_after(&self, t: f64) -> Option<f64> {
        let points = self.change_points();
        let first = *points.first()?;
        let (day, offset) = self.split(t);
        let base = day * self.day_length_min;
        Some(match points.iter().find(|&&p| p > offset) {
            Some(p) => base + p,
            None => base + self.day_length_min + first,
        })
    }

    /// On-shift minutes inside `[from, to)`.
    pub fn on_shift_between(&self, from: f64, to: f64) -> f64 {
        if to <= from {
            return 0.0;
        }
        let (first_day, _) = self.split(from);
        let (last_day, _) = self.split(to);
        let mut total = 0.0;
        let mut day = first_day;
        while day <= last_day {
            let base = day * self.day_length_min;
            for w in &self.windows {
                let s = (base + w.start_min).max(from);
                let e = (base + w.start_min + w.duration_min).min(to);
                if e > s {
                    total += e - s;
                }
            }
            day += 1.0;
        }
        total
    }

    /// The calendar time at which `amount` on-shift minutes have elapsed
    /// counting from `t`. Infinite when the schedule has no on-shift time.
    pub fn advance_on_shift(&self, t: f64, amount: f64) -> f64 {
        if amount <= 0.0 {
            return t;
        }
        if self.on_shift_per_day() <= 0.0 || !amount.is_finite() {
            return f64::INFINITY;
        }
        let (mut day, _) = self.split(t);
        let mut remaining = amount;
        loop {
            let base = day * self.day_length_min;
            for w in &self.windows {
                let s = (base + w.start_min).max(t);
                let e = base + w.start_min + w.duration_min;
                if e > s {
                    if e - s >= remaining {
                        return s + remaining;
                    }
                    remaining -= e - s;
                }
            }
            day += 1.0;
        }
    }
}
