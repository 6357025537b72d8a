use std::collections::{BTreeSet, HashMap};

use crate::error::Error;
use crate::model::{CrossdockModel, ModelConfig, ModelVariant, OrderType};
use crate::sim::{TraceEvent, TraceKind};
use crate::streams::{DistributionSpec, StreamMapping};

/// Ten working days.
pub const REDUCED_LENGTH: f64 = 14_400.0;
pub const REDUCED_ORDER_TYPES: usize = 3;
pub const FIXED_BATCH: u64 = 100;
const INFLATION: f64 = 1.5;
const WAIT_REPLICATIONS: u64 = 10;
const EXCERPT_LINES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Trace lines around the first failure.
    pub excerpt: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{mark}] {}: {}\n", c.name, c.detail));
            for line in &c.excerpt {
                out.push_str(&format!("    {line}\n"));
            }
        }
        out
    }
}

/// The configured model cut down to the first three order types and a
/// 10-day replication.
pub fn reduced_config(base: &ModelConfig) -> ModelConfig {
    let mut cfg = base.clone();
    cfg.replication_length_min = REDUCED_LENGTH;
    let weights = base.order_weights();
    let kept: f64 = weights[..REDUCED_ORDER_TYPES].iter().sum();
    let mix = if kept > 0.0 {
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| if i < REDUCED_ORDER_TYPES { w / kept } else { 0.0 })
            .collect()
    } else {
        vec![0.4, 0.3, 0.3, 0.0, 0.0]
    };
    cfg.order_mix = DistributionSpec::Discrete { weights: mix };
    cfg
}

fn parse_field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.split_whitespace().find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
}

fn check_types(trace: &[TraceEvent], cfg: &ModelConfig) -> ValidationCheck {
    let configured: BTreeSet<&str> = cfg
        .order_weights()
        .iter()
        .zip(OrderType::ALL)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, t)| t.as_str())
        .collect();
    let seen: BTreeSet<&str> = trace
        .iter()
        .filter(|e| e.kind == TraceKind::Create)
        .filter_map(|e| parse_field(&e.text, "type"))
        .collect();
    let missing: Vec<_> = configured.difference(&seen).collect();
    let extra: Vec<_> = seen.difference(&configured).collect();
    let passed = missing.is_empty() && extra.is_empty();
    ValidationCheck {
        name: "order types released",
        passed,
        detail: format!("configured {configured:?}, seen {seen:?}"),
        excerpt: Vec::new(),
    }
}

/// Each order must pass create, [buffer], [enqueue], start, end, dispose in
/// that order, and be served at the point it was routed to.
fn check_sequence(trace: &[TraceEvent], buffered: bool) -> ValidationCheck {
    use TraceKind::*;
    let mut progress: HashMap<&str, (usize, Option<&str>)> = HashMap::new();
    let mut steps = vec![Create];
    if buffered {
        steps.extend([BufferStart, BufferEnd]);
    }
    steps.extend([Enqueue, StartService, EndService, Dispose]);
    let mut orders = 0;
    for (i, ev) in trace.iter().enumerate() {
        if !ev.subject.starts_with("order-") {
            continue;
        }
        let (pos, point) = progress.entry(&ev.subject).or_insert((0, None));
        let next = steps[*pos..].iter().position(|&k| k == ev.kind).map(|off| *pos + off);
        let skipped_required = next.is_none_or(|n| steps[*pos..n].iter().any(|&k| k != Enqueue));
        let wrong_point = match ev.kind {
            Create => {
                *point = parse_field(&ev.text, "point");
                false
            }
            StartService => match (parse_field(&ev.text, "resource"), *point) {
                (Some(res), Some(p)) => !res.starts_with(&format!("{p}.")),
                _ => true,
            },
            _ => false,
        };
        if skipped_required || wrong_point {
            let lo = i.saturating_sub(EXCERPT_LINES / 2);
            let excerpt = trace[lo..(i + EXCERPT_LINES / 2).min(trace.len())].iter().map(|e| e.to_string()).collect();
            return ValidationCheck {
                name: "forward processing sequence",
                passed: false,
                detail: format!("{} out of sequence at {:.4}: {}", ev.subject, ev.time, ev.kind),
                excerpt,
            };
        }
        if ev.kind == Create {
            orders += 1;
        }
        *pos = next.expect("checked above") + 1;
    }
    ValidationCheck {
        name: "forward processing sequence",
        passed: true,
        detail: format!("{orders} orders followed create -> {}pick -> dispose", if buffered { "buffer -> " } else { "" }),
        excerpt: Vec::new(),
    }
}

fn check_fixed_batch(variant: ModelVariant, cfg: &ModelConfig, seed: u64) -> Result<ValidationCheck, Error> {
    let mut cfg = cfg.clone();
    cfg.max_orders = Some(FIXED_BATCH);
    let model = CrossdockModel::new(variant, cfg)?;
    let (r, trace) = model.run_traced(seed, 0)?;
    let disposed = trace.iter().filter(|e| e.kind == TraceKind::Dispose).count() as u64;
    let passed = r.orders_created == FIXED_BATCH
        && r.orders_disposed == FIXED_BATCH
        && disposed == FIXED_BATCH
        && r.orders_in_system == 0;
    Ok(ValidationCheck {
        name: "fixed batch conservation",
        passed,
        detail: format!(
            "scheduled {FIXED_BATCH}: created {}, disposed {}, in system {}",
            r.orders_created, r.orders_disposed, r.orders_in_system
        ),
        excerpt: if passed { Vec::new() } else { trace.iter().rev().take(EXCERPT_LINES).rev().map(|e| e.to_string()).collect() },
    })
}

fn inflate(spec: &DistributionSpec) -> DistributionSpec {
    match *spec {
        DistributionSpec::Triangular { min, mode, max } => DistributionSpec::Triangular {
            min: min * INFLATION,
            mode: mode * INFLATION,
            max: max * INFLATION,
        },
        ref other => other.clone(),
    }
}

fn check_forced_variation(variant: ModelVariant, cfg: &ModelConfig, seed: u64) -> Result<ValidationCheck, Error> {
    let mut baseline = cfg.clone();
    baseline.streams = Some(StreamMapping::Dedicated);
    let mut inflated = baseline.clone();
    inflated.manual_pick = inflate(&cfg.manual_pick);
    inflated.auto_dispense = inflate(&cfg.auto_dispense);
    let mean_wait = |cfg: ModelConfig| -> Result<f64, Error> {
        let model = CrossdockModel::new(variant, cfg)?;
        let mut total = 0.0;
        for i in 0..WAIT_REPLICATIONS {
            total += model.run_replication(seed, i)?.mean_wait_min;
        }
        Ok(total / WAIT_REPLICATIONS as f64)
    };
    let before = mean_wait(baseline)?;
    let after = mean_wait(inflated)?;
    Ok(ValidationCheck {
        name: "forced variation",
        passed: after > before,
        detail: format!("service times x{INFLATION}: mean queue wait {before:.4} -> {after:.4} min"),
        excerpt: Vec::new(),
    })
}

/// Runs the reduced scenario and the four visual-check assertions.
pub fn validate(variant: ModelVariant, model: &ModelConfig, seed: u64) -> Result<ValidationReport, Error> {
    let cfg = reduced_config(model);
    let reduced = CrossdockModel::new(variant, cfg.clone())?;
    let (_, trace) = reduced.run_traced(seed, 0)?;
    let checks = vec![
        check_types(&trace, &cfg),
        check_sequence(&trace, variant.has_buffer()),
        check_fixed_batch(variant, &cfg, seed)?,
        check_forced_variation(variant, &cfg, seed)?,
    ];
    Ok(ValidationReport { checks })
}
