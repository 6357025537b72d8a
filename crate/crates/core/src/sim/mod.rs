//! Single-replication discrete-event kernel: clock and future-event list,
//! shift schedules, capacity-constrained resources, FIFO queues, and the
//! text trace used for visual validation.

pub mod event;
pub mod resource;
pub mod schedule;
pub mod trace;

pub use event::{EventKind, EventRecord, FutureEventList, Subject};
pub use resource::{CostRates, FailureOutcome, Resource, UsageRecord, WaitQueue};
pub use schedule::{ShiftSchedule, ShiftWindow};
pub use trace::{write_trace, TraceEvent, TraceKind};
