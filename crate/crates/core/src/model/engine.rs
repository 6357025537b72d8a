use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SimError};
use crate::model::config::{ModelConfig, ModelVariant, OrderType, ResourceClass};
use crate::model::ledger::UsageLedger;
use crate::sim::{
    EventKind, EventRecord, FailureOutcome, FutureEventList, Resource, Subject, TraceEvent, TraceKind,
    WaitQueue,
};
use crate::streams::{
    sample_discrete, sample_exponential, DistributionSpec, StreamId, StreamMapping, StreamName, StreamSet,
    UniformSource,
};

const CLASSES: usize = ResourceClass::PRIORITY.len();

/// One order's passage through the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Order {
    pub id: u64,
    pub order_type: OrderType,
    /// Zero-based picking point.
    pub point: u32,
    pub created_at: f64,
    pub disposed_at: Option<f64>,
}

/// Outputs of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: u64,
    /// Pounds.
    pub total_usage_cost: f64,
    pub orders_created: u64,
    pub orders_disposed: u64,
    /// Orders still in the buffer, a queue, or service at the end.
    pub orders_in_system: u64,
    /// Created orders by type, MIFQ..RIRQ.
    pub orders_by_type: [u64; 5],
    /// Mean wait in the picking queues over orders that left them.
    pub mean_wait_min: f64,
    /// Time-average total picking-queue length.
    pub mean_queue_len: f64,
    pub failures: u64,
    pub events: u64,
    pub ledger: UsageLedger,
}

/// A validated, immutable model. Replications borrow it, so one model can
/// serve many worker threads.
#[derive(Debug, Clone)]
pub struct CrossdockModel {
    variant: ModelVariant,
    config: ModelConfig,
    mapping: StreamMapping,
}

impl CrossdockModel {
    pub fn new(variant: ModelVariant, config: ModelConfig) -> Result<Self, ConfigError> {
        config.validate(variant)?;
        let mapping = config.stream_mapping(variant);
        Ok(Self { variant, config, mapping })
    }

    /// The default configuration for `variant`.
    pub fn for_variant(variant: ModelVariant) -> Self {
        Self::new(variant, ModelConfig::for_variant(variant)).expect("default configuration is valid")
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn stream_mapping(&self) -> StreamMapping {
        self.mapping
    }

    /// Substreams a replication draws from.
    pub fn stream_ids(&self, replication: u64) -> Vec<StreamId> {
        StreamSet::new(0, replication, self.mapping).ids(replication)
    }

    /// Resource names in ledger order: for each point, auto, skilled, unskilled.
    pub fn resource_names(&self) -> Vec<String> {
        (0..self.config.picking_points)
            .flat_map(|p| ResourceClass::PRIORITY.iter().map(move |c| resource_name(p, *c)))
            .collect()
    }

    pub fn run_replication(&self, root_seed: u64, replication: u64) -> Result<ReplicationResult, SimError> {
        Replication::new(self, root_seed, replication, false).run()
    }

    /// Runs one replication and also returns its event trace.
    pub fn run_traced(
        &self,
        root_seed: u64,
        replication: u64,
    ) -> Result<(ReplicationResult, Vec<TraceEvent>), SimError> {
        let mut rep = Replication::new(self, root_seed, replication, true);
        rep.simulate()?;
        let trace = rep.trace.take().unwrap_or_default();
        Ok((rep.finish(), trace))
    }

    /// Runs one replication and returns every order's record.
    pub fn run_with_orders(
        &self,
        root_seed: u64,
        replication: u64,
    ) -> Result<(ReplicationResult, Vec<Order>), SimError> {
        let mut rep = Replication::new(self, root_seed, replication, false);
        rep.simulate()?;
        let orders = std::mem::take(&mut rep.orders);
        let mut result = rep.finish();
        result.orders_in_system = orders.iter().filter(|o| o.disposed_at.is_none()).count() as u64;
        Ok((result, orders))
    }
}

fn resource_name(point: u32, class: ResourceClass) -> String {
    format!("P{}.{}", point + 1, class.as_str())
}

fn order_label(id: u64) -> String {
    format!("order-{id}")
}

struct Replication<'m> {
    model: &'m CrossdockModel,
    replication: u64,
    fel: FutureEventList,
    streams: StreamSet,
    resources: Vec<Resource>,
    queues: Vec<WaitQueue>,
    orders: Vec<Order>,
    by_type: [u64; 5],
    disposed: u64,
    failures: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl<'m> Replication<'m> {
    fn new(model: &'m CrossdockModel, root_seed: u64, replication: u64, traced: bool) -> Self {
        let cfg = &model.config;
        let on_shift = cfg.shifts.is_on_shift(0.0);
        let resources = (0..cfg.picking_points)
            .flat_map(|p| {
                ResourceClass::PRIORITY.iter().map(move |&c| {
                    Resource::new(resource_name(p, c), cfg.staffing.of(c), cfg.rates.of(c), on_shift)
                })
            })
            .collect();
        Self {
            model,
            replication,
            fel: FutureEventList::new(cfg.replication_length_min),
            streams: StreamSet::new(root_seed, replication, model.mapping),
            resources,
            queues: (0..cfg.picking_points).map(|_| WaitQueue::new()).collect(),
            orders: Vec::new(),
            by_type: [0; 5],
            disposed: 0,
            failures: 0,
            trace: traced.then(Vec::new),
        }
    }

    fn cfg(&self) -> &'m ModelConfig {
        &self.model.config
    }

    fn note(&mut self, kind: TraceKind, subject: impl FnOnce() -> String, text: impl FnOnce() -> String) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent { time: self.fel.now(), kind, subject: subject(), text: text() });
        }
    }

    fn sample(&mut self, name: StreamName, spec: &DistributionSpec) -> f64 {
        spec.sample(self.streams.get(name))
    }

    fn run(mut self) -> Result<ReplicationResult, SimError> {
        self.simulate()?;
        Ok(self.finish())
    }

    fn simulate(&mut self) -> Result<(), SimError> {
        let cfg = self.cfg();
        if let Some(t) = cfg.shifts.next_change_after(0.0) {
            self.fel.schedule(t, EventKind::ShiftChange, Subject::System)?;
        }
        if cfg.max_orders != Some(0) {
            self.schedule_next_arrival()?;
        }
        if let Some(failure) = &cfg.failure {
            for r in self.auto_resources() {
                for _ in 0..self.resources[r].capacity() {
                    self.schedule_failure(r, failure.up_mean_min)?;
                }
            }
        }
        while let Some(ev) = self.fel.next_event() {
            self.dispatch(ev)?;
        }
        self.fel.close();
        self.note(TraceKind::EndReplication, || "system".into(), String::new);
        Ok(())
    }

    fn auto_resources(&self) -> Vec<usize> {
        (0..self.cfg().picking_points as usize).map(|p| p * CLASSES).collect()
    }

    fn schedule_next_arrival(&mut self) -> Result<(), SimError> {
        if let Some(times) = &self.cfg().arrival_list {
            if let Some(&t) = times.get(self.orders.len()) {
                self.fel.schedule(t, EventKind::Arrival, Subject::System)?;
            }
            return Ok(());
        }
        let mean = self.cfg().arrival.mean();
        if !mean.is_finite() {
            return Ok(());
        }
        let dt = sample_exponential(self.streams.get(StreamName::Arrivals), mean);
        self.fel.schedule_after(dt, EventKind::Arrival, Subject::System)?;
        Ok(())
    }

    fn schedule_failure(&mut self, resource: usize, up_mean: f64) -> Result<(), SimError> {
        let up = sample_exponential(self.streams.get(StreamName::Failure), up_mean);
        let at = self.cfg().shifts.advance_on_shift(self.fel.now(), up);
        if at.is_finite() {
            self.fel.schedule(at, EventKind::Failure, Subject::Resource(resource))?;
        }
        Ok(())
    }

    fn dispatch(&mut self, ev: EventRecord) -> Result<(), SimError> {
        match (ev.kind, ev.subject) {
            (EventKind::Arrival, _) => self.on_arrival(),
            (EventKind::BufferExit, Subject::Order(id)) => {
                self.note(TraceKind::BufferEnd, || order_label(id), String::new);
                self.arrive_at_point(id)
            }
            (EventKind::EndService, Subject::Service { resource, order }) => self.on_end_service(resource, order),
            (EventKind::ShiftChange, _) => self.on_shift_change(),
            (EventKind::Failure, Subject::Resource(r)) => self.on_failure(r),
            (EventKind::Repair, Subject::Resource(r)) => self.on_repair(r),
            (kind, subject) => unreachable!("unexpected event {kind} for {subject:?}"),
        }
    }

    fn on_arrival(&mut self) -> Result<(), SimError> {
        let cfg = self.cfg();
        let now = self.fel.now();
        let id = self.orders.len() as u64;
        let type_idx = sample_discrete(self.streams.get(StreamName::OrderTypeMix), cfg.order_weights());
        let order_type = OrderType::ALL[type_idx];
        let points = cfg.picking_points;
        let u = self.streams.get(StreamName::Routing).next_uniform();
        let point = ((u * points as f64) as u32).min(points - 1);
        self.orders.push(Order { id, order_type, point, created_at: now, disposed_at: None });
        self.by_type[type_idx] += 1;
        self.note(TraceKind::Create, || order_label(id), || format!("type={order_type} point=P{}", point + 1));

        if cfg.max_orders.is_none_or(|m| (self.orders.len() as u64) < m) {
            self.schedule_next_arrival()?;
        }
        match &cfg.buffer_delay {
            Some(spec) => {
                let d = self.sample(StreamName::Buffer, spec);
                self.fel.schedule_after(d, EventKind::BufferExit, Subject::Order(id))?;
                self.note(TraceKind::BufferStart, || order_label(id), || format!("delay={d:.4}"));
                Ok(())
            }
            None => self.arrive_at_point(id),
        }
    }

    fn free_resource(&self, point: u32) -> Option<usize> {
        let base = point as usize * CLASSES;
        (base..base + CLASSES).find(|&r| self.resources[r].available() > 0)
    }

    fn arrive_at_point(&mut self, id: u64) -> Result<(), SimError> {
        let point = self.orders[id as usize].point;
        match self.free_resource(point) {
            Some(r) => {
                self.queues[point as usize].record_no_wait();
                self.start_service(id, r)
            }
            None => {
                let now = self.fel.now();
                let q = &mut self.queues[point as usize];
                q.push(now, id);
                let len = q.len();
                self.note(TraceKind::Enqueue, || order_label(id), || format!("point=P{} queue={len}", point + 1));
                Ok(())
            }
        }
    }

    fn start_service(&mut self, id: u64, r: usize) -> Result<(), SimError> {
        let cfg = self.cfg();
        self.resources[r].seize(self.fel.now(), id)?;
        let duration = match ResourceClass::PRIORITY[r % CLASSES] {
            ResourceClass::Automated => self.sample(StreamName::AutoDispense, &cfg.auto_dispense),
            ResourceClass::Skilled => self.sample(StreamName::ManualPick, &cfg.manual_pick),
            ResourceClass::Unskilled => {
                self.sample(StreamName::ManualPick, &cfg.manual_pick) * cfg.unskilled_time_factor
            }
        };
        self.fel
            .schedule_after(duration, EventKind::EndService, Subject::Service { resource: r, order: id })?;
        if self.trace.is_some() {
            let name = self.resources[r].name().to_owned();
            self.note(TraceKind::StartService, || order_label(id), || format!("resource={name} duration={duration:.4}"));
        }
        Ok(())
    }

    fn on_end_service(&mut self, r: usize, id: u64) -> Result<(), SimError> {
        let now = self.fel.now();
        let went_down = self.resources[r].release(now, id)?;
        if self.trace.is_some() {
            let name = self.resources[r].name().to_owned();
            self.note(TraceKind::EndService, || order_label(id), || format!("resource={name}"));
        }
        self.orders[id as usize].disposed_at = Some(now);
        self.disposed += 1;
        self.note(TraceKind::Dispose, || order_label(id), String::new);
        if went_down {
            self.begin_repair(r)?;
        }
        self.serve_queue((r / CLASSES) as u32)
    }

    fn serve_queue(&mut self, point: u32) -> Result<(), SimError> {
        while !self.queues[point as usize].is_empty() {
            let Some(r) = self.free_resource(point) else { break };
            let now = self.fel.now();
            let id = self.queues[point as usize].pop(now).expect("queue is not empty");
            self.start_service(id, r)?;
        }
        Ok(())
    }

    fn on_shift_change(&mut self) -> Result<(), SimError> {
        let now = self.fel.now();
        let shifts = &self.cfg().shifts;
        let on = shifts.is_on_shift(now);
        for res in &mut self.resources {
            res.set_on_shift(now, on);
        }
        self.note(TraceKind::ShiftChange, || "system".into(), || if on { "on".into() } else { "off".into() });
        if let Some(t) = shifts.next_change_after(now) {
            self.fel.schedule(t, EventKind::ShiftChange, Subject::System)?;
        }
        if on {
            for p in 0..self.cfg().picking_points {
                self.serve_queue(p)?;
            }
        }
        Ok(())
    }

    fn begin_repair(&mut self, r: usize) -> Result<(), SimError> {
        let spec = &self.cfg().failure.as_ref().expect("failures are configured").repair;
        let d = self.sample(StreamName::Failure, spec);
        self.fel.schedule_after(d, EventKind::Repair, Subject::Resource(r))?;
        if self.trace.is_some() {
            let name = self.resources[r].name().to_owned();
            self.note(TraceKind::Failure, || name, || format!("repair={d:.4}"));
        }
        Ok(())
    }

    fn on_failure(&mut self, r: usize) -> Result<(), SimError> {
        self.failures += 1;
        match self.resources[r].fail_unit(self.fel.now()) {
            FailureOutcome::Immediate => self.begin_repair(r),
            FailureOutcome::Deferred => {
                if self.trace.is_some() {
                    let name = self.resources[r].name().to_owned();
                    self.note(TraceKind::Failure, || name, || "deferred until service ends".into());
                }
                Ok(())
            }
        }
    }

    fn on_repair(&mut self, r: usize) -> Result<(), SimError> {
        self.resources[r].repair_unit(self.fel.now());
        if self.trace.is_some() {
            let name = self.resources[r].name().to_owned();
            self.note(TraceKind::Repair, || name, String::new);
        }
        let up_mean = self.cfg().failure.as_ref().expect("failures are configured").up_mean_min;
        self.schedule_failure(r, up_mean)?;
        self.serve_queue((r / CLASSES) as u32)
    }

    fn finish(mut self) -> ReplicationResult {
        let end = self.fel.horizon();
        let records = self.resources.iter_mut().map(|r| r.finish(end)).collect();
        let ledger = UsageLedger { records };
        let (mut waited, mut total_wait, mut mean_len) = (0u64, 0.0, 0.0);
        for q in &mut self.queues {
            waited += q.served();
            total_wait += q.total_wait();
            mean_len += q.mean_len(end);
        }
        let created = self.by_type.iter().sum::<u64>();
        ReplicationResult {
            replication: self.replication,
            total_usage_cost: ledger.total_cost(),
            orders_created: created,
            orders_disposed: self.disposed,
            orders_in_system: created - self.disposed,
            orders_by_type: self.by_type,
            mean_wait_min: if waited > 0 { total_wait / waited as f64 } else { 0.0 },
            mean_queue_len: mean_len,
            failures: self.failures,
            events: self.fel.dispatched(),
            ledger,
        }
    }
}
