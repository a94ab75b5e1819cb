//! Server event log and troubleshooting/trace recording windows.

use serde::{Deserialize, Serialize};

use super::rpc::LogKind;
use crate::sim::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventCategory {
    Dhcp,
    CallHome,
    Session,
    Rpc,
    Config,
    Alarm,
    Software,
    Sync,
    Carrier,
    Supervision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEvent {
    pub time_ns: Nanos,
    pub category: EventCategory,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogArtifact {
    pub kind: LogKind,
    pub window_start_ns: Nanos,
    pub window_end_ns: Option<Nanos>,
    pub events: Vec<LogEvent>,
}

#[derive(Debug, Clone, Copy)]
struct Recording {
    kind: LogKind,
    start_index: usize,
    start_ns: Nanos,
    stop: Option<(usize, Nanos)>,
}

#[derive(Debug, Clone, Default)]
pub struct EventLog {
    events: Vec<LogEvent>,
    recording: Option<Recording>,
}

impl EventLog {
    pub fn push(&mut self, time_ns: Nanos, category: EventCategory, detail: impl Into<String>) {
        self.events.push(LogEvent {
            time_ns,
            category,
            detail: detail.into(),
        });
    }

    pub fn events(&self) -> &[LogEvent] {
        &self.events
    }

    pub fn start(&mut self, now: Nanos, kind: LogKind) {
        self.recording = Some(Recording {
            kind,
            start_index: self.events.len(),
            start_ns: now,
            stop: None,
        });
    }

    pub fn stop(&mut self, now: Nanos) -> bool {
        match &mut self.recording {
            Some(r) if r.stop.is_none() => {
                r.stop = Some((self.events.len(), now));
                true
            }
            _ => false,
        }
    }

    /// Events inside the window. Trace logs keep RPC traffic;
    /// troubleshooting logs omit it. `None` when nothing was started.
    pub fn collect(&self) -> Option<LogArtifact> {
        let r = self.recording?;
        let end = r.stop.map_or(self.events.len(), |(i, _)| i);
        let events = self.events[r.start_index..end]
            .iter()
            .filter(|e| r.kind == LogKind::Trace || e.category != EventCategory::Rpc)
            .cloned()
            .collect();
        Some(LogArtifact {
            kind: r.kind,
            window_start_ns: r.start_ns,
            window_end_ns: r.stop.map(|(_, t)| t),
            events,
        })
    }
}
