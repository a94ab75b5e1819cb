//! Session state machine shared by the client and server roles.

use serde::{Deserialize, Serialize};

use super::error::MplaneError;
use crate::sim::{Nanos, NS_PER_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    Idle,
    AddressAssigned,
    CallHomeSent,
    Authenticating,
    Established,
    Supervised,
    Closed,
}

impl SessionState {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionState::Idle => "IDLE",
            SessionState::AddressAssigned => "ADDRESS_ASSIGNED",
            SessionState::CallHomeSent => "CALL_HOME_SENT",
            SessionState::Authenticating => "AUTHENTICATING",
            SessionState::Established => "ESTABLISHED",
            SessionState::Supervised => "SUPERVISED",
            SessionState::Closed => "CLOSED",
        }
    }

    pub fn is_up(self) -> bool {
        matches!(self, SessionState::Established | SessionState::Supervised)
    }

    /// Legal edges. Forward steps follow the declared order; failed
    /// handshakes fall back to `ADDRESS_ASSIGNED` for a retry, and any
    /// state may close.
    pub fn can_transition(self, to: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, to),
            (Idle, AddressAssigned)
                | (AddressAssigned, CallHomeSent)
                | (CallHomeSent, Authenticating)
                | (Authenticating, Established)
                | (Established, Supervised)
                | (CallHomeSent, AddressAssigned)
                | (Authenticating, AddressAssigned)
                | (Closed, AddressAssigned)
                | (_, Closed)
        )
    }
}

pub const DEFAULT_SUPERVISION_INTERVAL_S: u64 = 60;
pub const DEFAULT_SUPERVISION_GUARD_S: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupervisionTimer {
    pub interval_s: u64,
    pub guard_s: u64,
    pub last_kick: Nanos,
}

impl SupervisionTimer {
    pub fn expiry(&self) -> Nanos {
        self.last_kick + (self.interval_s + self.guard_s) * NS_PER_S
    }

    /// A kick at exactly the expiry instant is late.
    pub fn is_expired(&self, now: Nanos) -> bool {
        now >= self.expiry()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscription {
    pub id: u64,
    pub stream: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MplaneSession {
    pub state: SessionState,
    pub peer_identity: String,
    pub session_id: u64,
    pub supervision: Option<SupervisionTimer>,
    pub subscriptions: Vec<Subscription>,
    /// Every state entered, in order, starting with `IDLE`.
    pub history: Vec<SessionState>,
}

impl Default for MplaneSession {
    fn default() -> Self {
        Self {
            state: SessionState::Idle,
            peer_identity: String::new(),
            session_id: 0,
            supervision: None,
            subscriptions: Vec::new(),
            history: vec![SessionState::Idle],
        }
    }
}

impl MplaneSession {
    pub fn transition(&mut self, to: SessionState) -> Result<(), MplaneError> {
        if !self.state.can_transition(to) {
            return Err(MplaneError::IllegalTransition {
                from: self.state.as_str().into(),
                to: to.as_str().into(),
            });
        }
        self.state = to;
        self.history.push(to);
        if matches!(to, SessionState::AddressAssigned | SessionState::Closed) {
            self.supervision = None;
            self.subscriptions.clear();
            self.peer_identity.clear();
        }
        Ok(())
    }

    pub fn require_up(&self) -> Result<(), MplaneError> {
        if self.state.is_up() {
            Ok(())
        } else {
            Err(MplaneError::NotEstablished(self.state.as_str().into()))
        }
    }

    /// Idempotent per stream: returns the existing id on a repeat.
    pub fn subscribe(&mut self, stream: &str) -> u64 {
        if let Some(s) = self.subscriptions.iter().find(|s| s.stream == stream) {
            return s.id;
        }
        let id = self.subscriptions.len() as u64 + 1;
        self.subscriptions.push(Subscription {
            id,
            stream: stream.into(),
        });
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_path() {
        let mut s = MplaneSession::default();
        for to in [
            SessionState::AddressAssigned,
            SessionState::CallHomeSent,
            SessionState::Authenticating,
            SessionState::Established,
            SessionState::Supervised,
            SessionState::Closed,
        ] {
            s.transition(to).unwrap();
        }
        assert_eq!(s.history.len(), 7);
    }

    #[test]
    fn supervised_only_from_established() {
        for from in [
            SessionState::Idle,
            SessionState::AddressAssigned,
            SessionState::CallHomeSent,
            SessionState::Authenticating,
            SessionState::Closed,
        ] {
            assert!(!from.can_transition(SessionState::Supervised), "{from:?}");
        }
        assert!(SessionState::Established.can_transition(SessionState::Supervised));
    }

    #[test]
    fn cannot_skip_authentication() {
        let mut s = MplaneSession::default();
        s.transition(SessionState::AddressAssigned).unwrap();
        assert!(s.transition(SessionState::Established).is_err());
        assert!(s.require_up().is_err());
    }

    #[test]
    fn expiry_is_strict() {
        let t = SupervisionTimer {
            interval_s: 60,
            guard_s: 10,
            last_kick: 5,
        };
        assert_eq!(t.expiry(), 70 * NS_PER_S + 5);
        assert!(!t.is_expired(70 * NS_PER_S + 4));
        assert!(t.is_expired(70 * NS_PER_S + 5));
    }

    #[test]
    fn subscribe_is_idempotent() {
        let mut s = MplaneSession::default();
        let a = s.subscribe("alarm-notif");
        assert_eq!(s.subscribe("alarm-notif"), a);
        assert_ne!(s.subscribe("NETCONF"), a);
        assert_eq!(s.subscriptions.len(), 2);
    }
}
