//! Fault injection: every negative behavior of the emulator comes from here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mplane::{Alarm, ServerFaults, Severity};

/// Fault id used when `raise_alarm` is toggled without an explicit alarm.
pub const DEFAULT_INJECTED_FAULT_ID: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultToggle {
    WithholdSupervisionAck,
    CorruptSoftwareChecksum,
    RejectConfigNode,
    DropCallhomeAuth,
    RaiseAlarm,
    DisableSync,
}

impl FaultToggle {
    pub const ALL: [FaultToggle; 6] = [
        FaultToggle::WithholdSupervisionAck,
        FaultToggle::CorruptSoftwareChecksum,
        FaultToggle::RejectConfigNode,
        FaultToggle::DropCallhomeAuth,
        FaultToggle::RaiseAlarm,
        FaultToggle::DisableSync,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FaultToggle::WithholdSupervisionAck => "withhold_supervision_ack",
            FaultToggle::CorruptSoftwareChecksum => "corrupt_software_checksum",
            FaultToggle::RejectConfigNode => "reject_config_node",
            FaultToggle::DropCallhomeAuth => "drop_callhome_auth",
            FaultToggle::RaiseAlarm => "raise_alarm",
            FaultToggle::DisableSync => "disable_sync",
        }
    }

    /// The catalog case whose internal behavior this toggle changes.
    pub fn mapped_case(self) -> &'static str {
        match self {
            FaultToggle::WithholdSupervisionAck => "3.1.3.2",
            FaultToggle::CorruptSoftwareChecksum => "3.1.6.2",
            FaultToggle::RejectConfigNode => "3.1.10.2",
            FaultToggle::DropCallhomeAuth => "3.1.1.8",
            FaultToggle::RaiseAlarm => "3.1.5.1",
            FaultToggle::DisableSync => "3.1.10.2",
        }
    }
}

impl fmt::Display for FaultToggle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fault toggle {0:?}")]
pub struct UnknownToggle(pub String);

impl FromStr for FaultToggle {
    type Err = UnknownToggle;

    fn from_str(s: &str) -> Result<Self, UnknownToggle> {
        FaultToggle::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| UnknownToggle(s.to_string()))
    }
}

/// Path rejected by `reject_config_node` unless the plan names another.
pub const DEFAULT_REJECTED_NODE: &str = "carriers/tx0/tx-power-dbm";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FaultPlan {
    pub withhold_supervision_ack: bool,
    pub corrupt_software_checksum: bool,
    pub reject_config_node: Option<String>,
    pub drop_callhome_auth: bool,
    pub raise_alarm: Option<Alarm>,
    pub disable_sync: bool,
}

impl FaultPlan {
    pub fn is_clean(&self) -> bool {
        self.active().is_empty()
    }

    pub fn with(mut self, toggle: FaultToggle) -> Self {
        self.set(toggle);
        self
    }

    pub fn set(&mut self, toggle: FaultToggle) {
        match toggle {
            FaultToggle::WithholdSupervisionAck => self.withhold_supervision_ack = true,
            FaultToggle::CorruptSoftwareChecksum => self.corrupt_software_checksum = true,
            FaultToggle::RejectConfigNode => {
                self.reject_config_node
                    .get_or_insert_with(|| DEFAULT_REJECTED_NODE.to_string());
            }
            FaultToggle::DropCallhomeAuth => self.drop_callhome_auth = true,
            FaultToggle::RaiseAlarm => {
                self.raise_alarm.get_or_insert_with(injected_alarm);
            }
            FaultToggle::DisableSync => self.disable_sync = true,
        }
    }

    pub fn active(&self) -> Vec<FaultToggle> {
        FaultToggle::ALL
            .into_iter()
            .filter(|t| match t {
                FaultToggle::WithholdSupervisionAck => self.withhold_supervision_ack,
                FaultToggle::CorruptSoftwareChecksum => self.corrupt_software_checksum,
                FaultToggle::RejectConfigNode => self.reject_config_node.is_some(),
                FaultToggle::DropCallhomeAuth => self.drop_callhome_auth,
                FaultToggle::RaiseAlarm => self.raise_alarm.is_some(),
                FaultToggle::DisableSync => self.disable_sync,
            })
            .collect()
    }

    pub fn server_faults(&self) -> ServerFaults {
        ServerFaults {
            withhold_supervision_ack: self.withhold_supervision_ack,
            corrupt_software_checksum: self.corrupt_software_checksum,
            reject_config_node: self.reject_config_node.clone(),
            drop_callhome_auth: self.drop_callhome_auth,
        }
    }
}

fn injected_alarm() -> Alarm {
    Alarm {
        fault_id: DEFAULT_INJECTED_FAULT_ID,
        fault_source: "fan-tray".into(),
        severity: Severity::Minor,
        is_cleared: false,
        event_time_ns: 0,
        text: "injected fault".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for t in FaultToggle::ALL {
            assert_eq!(t.name().parse::<FaultToggle>().unwrap(), t);
            assert_eq!(FaultPlan::default().with(t).active(), [t]);
        }
        assert!("bogus".parse::<FaultToggle>().is_err());
    }

    #[test]
    fn server_projection() {
        let p = FaultPlan::default()
            .with(FaultToggle::RejectConfigNode)
            .with(FaultToggle::DropCallhomeAuth);
        let s = p.server_faults();
        assert_eq!(s.reject_config_node.as_deref(), Some(DEFAULT_REJECTED_NODE));
        assert!(s.drop_callhome_auth && !s.withhold_supervision_ack);
        assert!(FaultPlan::default().is_clean());
    }

    #[test]
    fn injected_alarm_is_fault_nine() {
        let p = FaultPlan::default().with(FaultToggle::RaiseAlarm);
        assert_eq!(p.raise_alarm.unwrap().fault_id, 9);
    }
}
