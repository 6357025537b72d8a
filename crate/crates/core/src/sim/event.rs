use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Arrival,
    /// An order leaves the buffer station.
    BufferExit,
    StartService,
    EndService,
    ShiftChange,
    Failure,
    Repair,
    EndReplication,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::BufferExit => "buffer-exit",
            EventKind::StartService => "start-service",
            EventKind::EndService => "end-service",
            EventKind::ShiftChange => "shift-change",
            EventKind::Failure => "failure",
            EventKind::Repair => "repair",
            EventKind::EndReplication => "end-replication",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an event acts on. Resources are referenced by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    System,
    Order(u64),
    Resource(usize),
    Service { resource: usize, order: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    /// Simulated minutes.
    pub time: f64,
    /// Insertion counter; breaks ties between equal times.
    pub sequence: u64,
    pub kind: EventKind,
    pub subject: Subject,
}

struct Pending(EventRecord);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Reversed: BinaryHeap is a max-heap and we want the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
    }
}

/// Simulation clock plus future-event list, ordered by (time, sequence).
pub struct FutureEventList {
    heap: BinaryHeap<Pending>,
    clock: f64,
    next_sequence: u64,
    horizon: f64,
    dispatched: u64,
}

impl FutureEventList {
    /// A list whose replication ends at `horizon` minutes.
    pub fn new(horizon: f64) -> Self {
        Self {
            heap: BinaryHeap::new(),
            clock: 0.0,
            next_sequence: 0,
            horizon,
            dispatched: 0,
        }
    }

    #[inline]
    pub fn now(&self) -> f64 {
        self.clock
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind, subject: Subject) -> Result<u64, SimError> {
        if time.is_nan() {
            return Err(SimError::NanTime);
        }
        if time < self.clock {
            return Err(SimError::ScheduleInPast { time, clock: self.clock });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Pending(EventRecord { time, sequence, kind, subject }));
        Ok(sequence)
    }

    pub fn schedule_after(&mut self, delay: f64, kind: EventKind, subject: Subject) -> Result<u64, SimError> {
        self.schedule(self.clock + delay, kind, subject)
    }

    /// Pops the earliest event and advances the clock to it. Returns `None`
    /// at end of replication: the list is empty, or the earliest event lies
    /// beyond the horizon (it is left undispatched).
    pub fn next_event(&mut self) -> Option<EventRecord> {
        if self.heap.peek()?.0.time > self.horizon {
            return None;
        }
        let Pending(ev) = self.heap.pop()?;
        self.clock = ev.time;
        self.dispatched += 1;
        Some(ev)
    }

    /// Moves the clock to the horizon once dispatch has finished.
    pub fn close(&mut self) {
        if self.clock < self.horizon {
            self.clock = self.horizon;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn push(fel: &mut FutureEventList, t: f64, order: u64) {
        fel.schedule(t, EventKind::Arrival, Subject::Order(order)).unwrap();
    }

    #[test]
    fn earliest_time_first() {
        let mut fel = FutureEventList::new(100.0);
        push(&mut fel, 5.0, 0);
        push(&mut fel, 3.0, 1);
        let ev = fel.next_event().unwrap();
        assert_eq!(ev.time, 3.0);
        assert_eq!(fel.now(), 3.0);
    }

    #[test]
    fn ties_dispatch_in_insertion_order() {
        let mut fel = FutureEventList::new(100.0);
        push(&mut fel, 7.0, 10);
        push(&mut fel, 7.0, 11);
        assert_eq!(fel.next_event().unwrap().subject, Subject::Order(10));
        assert_eq!(fel.next_event().unwrap().subject, Subject::Order(11));
    }

    #[test]
    fn zero_delay_runs_before_later_events() {
        let mut fel = FutureEventList::new(100.0);
        push(&mut fel, 4.0, 0);
        push(&mut fel, 9.0, 1);
        fel.next_event().unwrap();
        fel.schedule_after(0.0, EventKind::Arrival, Subject::Order(2)).unwrap();
        let ev = fel.next_event().unwrap();
        assert_eq!((ev.time, ev.subject), (4.0, Subject::Order(2)));
    }

    #[test]
    fn empty_list_ends_replication() {
        let mut fel = FutureEventList::new(100.0);
        assert!(fel.next_event().is_none());
    }

    #[test]
    fn events_past_horizon_are_not_dispatched() {
        let mut fel = FutureEventList::new(28_800.0);
        push(&mut fel, 28_900.0, 0);
        assert!(fel.next_event().is_none());
        assert_eq!(fel.pending(), 1);
        assert_eq!(fel.now(), 0.0);
        push(&mut fel, 28_800.0, 1);
        assert_eq!(fel.next_event().unwrap().time, 28_800.0);
    }

    #[test]
    fn scheduling_into_the_past_is_an_error() {
        let mut fel = FutureEventList::new(100.0);
        push(&mut fel, 10.0, 0);
        fel.next_event().unwrap();
        let err = fel.schedule(9.0, EventKind::Arrival, Subject::System).unwrap_err();
        assert_eq!(err, SimError::ScheduleInPast { time: 9.0, clock: 10.0 });
        assert_eq!(fel.schedule(f64::NAN, EventKind::Arrival, Subject::System), Err(SimError::NanTime));
    }
}
