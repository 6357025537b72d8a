use std::fmt;
use std::io::{self, Write};

/// Kinds of trace line. Finer-grained than event kinds: one event can emit
/// several lines (an end-service also disposes its order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Create,
    BufferStart,
    BufferEnd,
    Enqueue,
    StartService,
    EndService,
    Dispose,
    ShiftChange,
    Failure,
    Repair,
    EndReplication,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Create => "create",
            TraceKind::BufferStart => "buffer-start",
            TraceKind::BufferEnd => "buffer-end",
            TraceKind::Enqueue => "enqueue",
            TraceKind::StartService => "start-service",
            TraceKind::EndService => "end-service",
            TraceKind::Dispose => "dispose",
            TraceKind::ShiftChange => "shift-change",
            TraceKind::Failure => "failure",
            TraceKind::Repair => "repair",
            TraceKind::EndReplication => "end-replication",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: TraceKind,
    pub subject: String,
    pub text: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}\t{}\t{}\t{}", self.time, self.kind, self.subject, self.text)
    }
}

pub fn write_trace<W: Write>(mut out: W, events: &[TraceEvent]) -> io::Result<()> {
    for ev in events {
        writeln!(out, "{ev}")?;
    }
    out.flush()
}
