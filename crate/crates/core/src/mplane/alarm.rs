//! Fault management: alarm events and the derived active-alarm list.

use serde::{Deserialize, Serialize};

use super::datastore::Node;
use crate::sim::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Severity {
    Critical,
    Major,
    Minor,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Critical => "CRITICAL",
            Severity::Major => "MAJOR",
            Severity::Minor => "MINOR",
            Severity::Warning => "WARNING",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alarm {
    pub fault_id: u32,
    pub fault_source: String,
    pub severity: Severity,
    pub is_cleared: bool,
    pub event_time_ns: Nanos,
    #[serde(default)]
    pub text: String,
}

/// Fault id raised when M-Plane supervision expires.
pub const FAULT_SUPERVISION: u32 = 24;
/// Fault id raised when sync is lost.
pub const FAULT_SYNC: u32 = 17;

/// Append-only alarm event history.
#[derive(Debug, Clone, Default)]
pub struct AlarmManager {
    events: Vec<Alarm>,
}

impl AlarmManager {
    pub fn record(&mut self, alarm: Alarm) {
        self.events.push(alarm);
    }

    pub fn events(&self) -> &[Alarm] {
        &self.events
    }

    /// Alarms whose latest event for the same `(fault_id, fault_source)`
    /// is not cleared, ordered by key.
    pub fn active(&self) -> Vec<&Alarm> {
        let mut latest: std::collections::BTreeMap<(u32, &str), &Alarm> = Default::default();
        for a in &self.events {
            latest.insert((a.fault_id, a.fault_source.as_str()), a);
        }
        latest.into_values().filter(|a| !a.is_cleared).collect()
    }

    pub fn is_active(&self, fault_id: u32) -> bool {
        self.active().iter().any(|a| a.fault_id == fault_id)
    }

    pub fn render(&self) -> Node {
        let mut list = std::collections::BTreeMap::new();
        for a in self.active() {
            let mut m = std::collections::BTreeMap::new();
            m.insert("fault-id".into(), Node::Leaf(a.fault_id.to_string()));
            m.insert("fault-source".into(), Node::Leaf(a.fault_source.clone()));
            m.insert(
                "fault-severity".into(),
                Node::Leaf(a.severity.as_str().into()),
            );
            m.insert("is-cleared".into(), Node::Leaf("false".into()));
            m.insert(
                "event-time-ns".into(),
                Node::Leaf(a.event_time_ns.to_string()),
            );
            list.insert(
                format!("{}-{}", a.fault_id, a.fault_source),
                Node::Container(m),
            );
        }
        Node::Container(list)
    }
}
