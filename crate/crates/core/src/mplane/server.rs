//! Server role: the management endpoint hosted by the O-RU.
//!
//! The server is a pure state machine. Its owner feeds it decoded frames
//! and timer ticks and transmits whatever frames it returns.

use serde::{Deserialize, Serialize};

use super::alarm::{Alarm, AlarmManager, Severity, FAULT_SUPERVISION};
use super::datastore::{ConfigSchema, Datastore};
use super::eventlog::{EventCategory, EventLog};
use super::model::{self, list_entry_prefixes, oru_schema};
use super::rpc::{
    sha256_hex, stream_matches, ConfigChange, ErrorTag, Frame, Hello, Notification,
    NotificationEvent, Operation, Role, RpcError, RpcReply, RpcRequest, STREAM_ALARM, STREAM_ALL,
    STREAM_CONFIG, STREAM_SYNC,
};
use super::session::{MplaneSession, SessionState, SupervisionTimer};
use super::software::SoftwareInventory;
use crate::sim::Nanos;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credentials {
    pub identity: String,
    pub fingerprint: String,
}

impl Credentials {
    /// Fingerprint is the SHA-256 of the certificate material.
    pub fn from_certificate(identity: impl Into<String>, certificate: &str) -> Self {
        Self {
            identity: identity.into(),
            fingerprint: sha256_hex(certificate.as_bytes()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub credentials: Credentials,
    pub trusted_client_fingerprint: String,
    pub software_build: String,
}

/// Server-side fault toggles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ServerFaults {
    pub withhold_supervision_ack: bool,
    pub corrupt_software_checksum: bool,
    pub reject_config_node: Option<String>,
    /// Present damaged credential material in the server hello.
    pub drop_callhome_auth: bool,
}

pub struct MplaneServer {
    config: ServerConfig,
    session: MplaneSession,
    next_session_id: u64,
    datastore: Datastore,
    schema: ConfigSchema,
    alarms: AlarmManager,
    software: SoftwareInventory,
    log: EventLog,
    outbox: Vec<Frame>,
    pub faults: ServerFaults,
    pending_reset: bool,
    auth_rejections: u32,
}

impl MplaneServer {
    pub fn new(config: ServerConfig, datastore: Datastore) -> Self {
        let software = SoftwareInventory::factory(&config.software_build);
        let mut s = Self {
            config,
            session: MplaneSession::default(),
            next_session_id: 1,
            datastore,
            schema: oru_schema(),
            alarms: AlarmManager::default(),
            software,
            log: EventLog::default(),
            outbox: Vec::new(),
            faults: ServerFaults::default(),
            pending_reset: false,
            auth_rejections: 0,
        };
        s.refresh_operational();
        s
    }

    pub fn session(&self) -> &MplaneSession {
        &self.session
    }

    pub fn state(&self) -> SessionState {
        self.session.state
    }

    pub fn datastore(&self) -> &Datastore {
        &self.datastore
    }

    /// Direct access for the hosting device to publish operational state.
    pub fn datastore_mut(&mut self) -> &mut Datastore {
        &mut self.datastore
    }

    pub fn alarms(&self) -> &AlarmManager {
        &self.alarms
    }

    pub fn software(&self) -> &SoftwareInventory {
        &self.software
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn log_event(&mut self, now: Nanos, category: EventCategory, detail: impl Into<String>) {
        self.log.push(now, category, detail);
    }

    pub fn auth_rejections(&self) -> u32 {
        self.auth_rejections
    }

    pub fn take_outbox(&mut self) -> Vec<Frame> {
        std::mem::take(&mut self.outbox)
    }

    pub fn take_pending_reset(&mut self) -> bool {
        std::mem::take(&mut self.pending_reset)
    }

    fn refresh_operational(&mut self) {
        self.datastore
            .set_subtree(model::ALARM_LIST, self.alarms.render());
        self.datastore
            .set_subtree(model::SOFTWARE_SLOTS, self.software.render());
    }

    fn transition(&mut self, to: SessionState) {
        self.session
            .transition(to)
            .expect("server drives only legal session transitions");
    }

    pub fn address_assigned(&mut self, now: Nanos, address: &str) {
        if self.session.state != SessionState::AddressAssigned {
            self.transition(SessionState::AddressAssigned);
        }
        self.log.push(
            now,
            EventCategory::Dhcp,
            format!("address {address} assigned"),
        );
    }

    /// Connection to the call home client is up; returns the server hello.
    pub fn call_home_connected(&mut self, now: Nanos, endpoint: &str) -> Frame {
        self.transition(SessionState::CallHomeSent);
        self.log.push(
            now,
            EventCategory::CallHome,
            format!("call home to {endpoint}"),
        );
        let fingerprint = if self.faults.drop_callhome_auth {
            String::new()
        } else {
            self.config.credentials.fingerprint.clone()
        };
        Frame::Hello(Hello {
            role: Role::Server,
            identity: self.config.credentials.identity.clone(),
            fingerprint,
            session_id: None,
        })
    }

    pub fn call_home_failed(&mut self, now: Nanos, reason: &str) {
        if self.session.state == SessionState::CallHomeSent
            || self.session.state == SessionState::Authenticating
        {
            self.transition(SessionState::AddressAssigned);
        }
        self.log.push(
            now,
            EventCategory::CallHome,
            format!("call home failed: {reason}"),
        );
    }

    /// Transport to the client went away.
    pub fn connection_lost(&mut self, now: Nanos) {
        match self.session.state {
            SessionState::CallHomeSent | SessionState::Authenticating => {
                self.transition(SessionState::AddressAssigned);
            }
            SessionState::Established | SessionState::Supervised => {
                self.transition(SessionState::Closed);
            }
            _ => return,
        }
        self.log
            .push(now, EventCategory::Session, "connection lost");
    }

    /// Re-enters the address-assigned state after a closed session so the
    /// owner can call home again.
    pub fn rearm(&mut self) {
        if self.session.state == SessionState::Closed {
            self.transition(SessionState::AddressAssigned);
        }
    }

    pub fn handle_frame(&mut self, now: Nanos, frame: Frame) -> Vec<Frame> {
        let mut out = Vec::new();
        match frame {
            Frame::Hello(hello) => out.extend(self.handle_hello(now, hello)),
            Frame::Rpc(req) => out.push(Frame::RpcReply(self.handle_rpc(now, req))),
            Frame::Close { reason } => {
                self.log.push(
                    now,
                    EventCategory::Session,
                    format!("peer closed: {reason}"),
                );
                self.connection_lost(now);
            }
            Frame::RpcReply(_) | Frame::Notification(_) => {}
        }
        out.extend(self.take_outbox());
        out
    }

    fn handle_hello(&mut self, now: Nanos, hello: Hello) -> Option<Frame> {
        if self.session.state != SessionState::CallHomeSent {
            return None;
        }
        self.transition(SessionState::Authenticating);
        if hello.role != Role::Client || hello.fingerprint != self.config.trusted_client_fingerprint
        {
            self.auth_rejections += 1;
            self.transition(SessionState::AddressAssigned);
            self.log.push(
                now,
                EventCategory::Session,
                format!("authentication rejected for {}", hello.identity),
            );
            return Some(Frame::Close {
                reason: "authentication failed".into(),
            });
        }
        self.transition(SessionState::Established);
        self.session.session_id = self.next_session_id;
        self.next_session_id += 1;
        self.session.peer_identity = hello.identity;
        self.log.push(
            now,
            EventCategory::Session,
            format!("session {} established", self.session.session_id),
        );
        None
    }

    pub fn handle_rpc(&mut self, now: Nanos, req: RpcRequest) -> RpcReply {
        let name = req.operation.name();
        let reply = if self.session.state.is_up() {
            self.dispatch(now, req.message_id, req.operation)
        } else {
            RpcReply::error(
                req.message_id,
                RpcError::new(
                    ErrorTag::AccessDenied,
                    format!("session not established ({})", self.session.state.as_str()),
                ),
            )
        };
        let outcome = match reply.rpc_error() {
            Some(e) => e.tag.as_str(),
            None => "ok",
        };
        self.log.push(
            now,
            EventCategory::Rpc,
            format!("{name} id={} -> {outcome}", req.message_id),
        );
        reply
    }

    fn dispatch(&mut self, now: Nanos, id: u64, op: Operation) -> RpcReply {
        let result = match op {
            Operation::Get => Ok(Some(self.datastore.fragment(None).to_json())),
            Operation::GetWithFilter { filter } => {
                Ok(Some(self.datastore.fragment(Some(&filter)).to_json()))
            }
            Operation::EditConfig { changes } => self.edit_config(now, &changes).map(|_| None),
            Operation::Subscribe { stream } => self
                .subscribe(&stream)
                .map(|sid| Some(serde_json::json!({ "subscription-id": sid }))),
            Operation::SupervisionKick {
                interval_s,
                guard_s,
            } => self
                .supervision_kick(now, interval_s, guard_s)
                .map(|_| None),
            Operation::SwDownload { image } => {
                let corrupt = self.faults.corrupt_software_checksum;
                let r = self.software.download(&image, corrupt);
                if let Ok((slot, state)) = &r {
                    self.log.push(
                        now,
                        EventCategory::Software,
                        format!(
                            "download {} into {slot}: {}",
                            image.build_id,
                            state.as_str()
                        ),
                    );
                }
                self.refresh_operational();
                r.map(|(slot, state)| {
                    Some(serde_json::json!({"slot": slot, "status": state.as_str()}))
                })
            }
            Operation::SwInstall { slot } => {
                let r = self.software.install(&slot);
                self.log.push(
                    now,
                    EventCategory::Software,
                    format!("install {slot}: {}", ok_str(&r)),
                );
                r.map(|_| None)
            }
            Operation::SwActivate { slot } => {
                let r = self.software.activate(&slot);
                self.log.push(
                    now,
                    EventCategory::Software,
                    format!("activate {slot}: {}", ok_str(&r)),
                );
                self.refresh_operational();
                r.map(|_| None)
            }
            Operation::Reset => {
                self.pending_reset = true;
                Ok(None)
            }
            Operation::LogStart { kind } => {
                self.log.start(now, kind);
                Ok(None)
            }
            Operation::LogStop => {
                if self.log.stop(now) {
                    Ok(None)
                } else {
                    Err(RpcError::new(
                        ErrorTag::OperationFailed,
                        "no log recording in progress",
                    ))
                }
            }
            Operation::LogCollect => match self.log.collect() {
                Some(a) => Ok(Some(
                    serde_json::to_value(a).expect("log artifacts serialize"),
                )),
                None => Err(RpcError::new(
                    ErrorTag::DataMissing,
                    "log collection never started",
                )),
            },
        };
        match result {
            Ok(None) => RpcReply::ok(id),
            Ok(Some(v)) => RpcReply::data(id, v),
            Err(e) => RpcReply::error(id, e),
        }
    }

    fn subscribe(&mut self, stream: &str) -> Result<u64, RpcError> {
        if ![STREAM_ALL, STREAM_ALARM, STREAM_CONFIG, STREAM_SYNC].contains(&stream) {
            return Err(RpcError::new(
                ErrorTag::InvalidValue,
                format!("unknown stream {stream}"),
            ));
        }
        Ok(self.session.subscribe(stream))
    }

    /// Validates against a scratch copy, then swaps it in, so a failure
    /// anywhere leaves the datastore untouched.
    fn edit_config(&mut self, now: Nanos, changes: &[ConfigChange]) -> Result<(), RpcError> {
        let mut scratch = self.datastore.clone();
        for c in changes {
            if self.faults.reject_config_node.as_deref() == Some(c.path.as_str()) {
                return Err(
                    RpcError::new(ErrorTag::OperationFailed, "node rejected by device").at(&c.path),
                );
            }
            let rule = self.schema.rule_for(&c.path).ok_or_else(|| {
                RpcError::new(ErrorTag::UnknownElement, "not a writable node").at(&c.path)
            })?;
            for entry in list_entry_prefixes(rule.pattern, &c.path) {
                if scratch.get(&entry).is_none() {
                    return Err(RpcError::new(
                        ErrorTag::UnknownElement,
                        format!("no list entry {entry}"),
                    )
                    .at(&c.path));
                }
            }
            if !rule.kind.accepts(&c.value) {
                return Err(RpcError::new(
                    ErrorTag::InvalidValue,
                    format!("{:?} is not {}", c.value, rule.kind.describe()),
                )
                .at(&c.path));
            }
            if rule.pattern == "carriers/*/active"
                && c.value == "true"
                && scratch.leaf(model::SYNC_STATE) != Some("LOCKED")
            {
                return Err(RpcError::new(
                    ErrorTag::OperationFailed,
                    format!(
                        "carrier activation requires sync LOCKED, state is {}",
                        scratch.leaf(model::SYNC_STATE).unwrap_or("unknown")
                    ),
                )
                .at(&c.path));
            }
            scratch.set_leaf(&c.path, c.value.clone());
        }
        self.datastore = scratch;
        let paths: Vec<String> = changes.iter().map(|c| c.path.clone()).collect();
        self.log.push(
            now,
            EventCategory::Config,
            format!("edit applied: {}", paths.join(", ")),
        );
        self.notify(now, NotificationEvent::ConfigChange { paths });
        Ok(())
    }

    fn supervision_kick(
        &mut self,
        now: Nanos,
        interval_s: u64,
        guard_s: u64,
    ) -> Result<(), RpcError> {
        if interval_s == 0 {
            return Err(RpcError::new(
                ErrorTag::InvalidValue,
                "supervision interval must be positive",
            ));
        }
        match self.session.supervision {
            None => {
                self.transition(SessionState::Supervised);
                self.session.supervision = Some(SupervisionTimer {
                    interval_s,
                    guard_s,
                    last_kick: now,
                });
                self.log.push(
                    now,
                    EventCategory::Supervision,
                    format!("supervision started interval={interval_s}s guard={guard_s}s"),
                );
                Ok(())
            }
            Some(timer) if timer.is_expired(now) => {
                self.expire_supervision(now);
                Err(RpcError::new(
                    ErrorTag::OperationFailed,
                    "supervision already expired",
                ))
            }
            Some(_) if self.faults.withhold_supervision_ack => Err(RpcError::new(
                ErrorTag::OperationFailed,
                "supervision notification withheld",
            )),
            Some(_) => {
                self.session.supervision = Some(SupervisionTimer {
                    interval_s,
                    guard_s,
                    last_kick: now,
                });
                Ok(())
            }
        }
    }

    pub fn supervision_deadline(&self) -> Option<Nanos> {
        match self.session.state {
            SessionState::Supervised => self.session.supervision.map(|t| t.expiry()),
            _ => None,
        }
    }

    /// Timer tick. Returns frames to transmit (a close on expiry).
    pub fn on_timer(&mut self, now: Nanos) -> Vec<Frame> {
        match self.session.supervision {
            Some(t) if self.session.state == SessionState::Supervised && t.is_expired(now) => {
                self.expire_supervision(now);
                vec![Frame::Close {
                    reason: "supervision expired".into(),
                }]
            }
            _ => Vec::new(),
        }
    }

    fn expire_supervision(&mut self, now: Nanos) {
        let expiry = self.session.supervision.map_or(now, |t| t.expiry());
        self.transition(SessionState::Closed);
        self.deactivate_carriers(now, "supervision expired");
        self.log.push(
            now,
            EventCategory::Supervision,
            format!("supervision expired at {expiry} ns"),
        );
        self.raise_alarm(Alarm {
            fault_id: FAULT_SUPERVISION,
            fault_source: "mplane".into(),
            severity: Severity::Major,
            is_cleared: false,
            event_time_ns: now,
            text: "M-Plane supervision expired".into(),
        });
    }

    pub fn deactivate_carriers(&mut self, now: Nanos, reason: &str) {
        let ids: Vec<String> = self
            .datastore
            .get(model::CARRIERS)
            .map(|n| n.children().map(|(k, _)| k.clone()).collect())
            .unwrap_or_default();
        let mut changed = false;
        for id in ids {
            let path = model::carrier_path(&id, "active");
            if self.datastore.leaf(&path) == Some("true") {
                self.datastore.set_leaf(&path, "false");
                changed = true;
            }
        }
        if changed {
            self.log.push(
                now,
                EventCategory::Carrier,
                format!("carriers deactivated: {reason}"),
            );
        }
    }

    pub fn raise_alarm(&mut self, alarm: Alarm) {
        let now = alarm.event_time_ns;
        self.log.push(
            now,
            EventCategory::Alarm,
            format!(
                "fault {} source {} {} {}",
                alarm.fault_id,
                alarm.fault_source,
                alarm.severity.as_str(),
                if alarm.is_cleared {
                    "cleared"
                } else {
                    "raised"
                }
            ),
        );
        self.alarms.record(alarm.clone());
        self.refresh_operational();
        self.notify(now, NotificationEvent::Alarm(alarm));
    }

    pub fn publish_sync_state(&mut self, now: Nanos, state: &str) {
        if self.datastore.leaf(model::SYNC_STATE) == Some(state) {
            return;
        }
        self.datastore.set_leaf(model::SYNC_STATE, state);
        self.log
            .push(now, EventCategory::Sync, format!("sync state {state}"));
        self.notify(
            now,
            NotificationEvent::SyncState {
                state: state.into(),
            },
        );
    }

    fn notify(&mut self, now: Nanos, event: NotificationEvent) {
        if !self.session.state.is_up() {
            return;
        }
        for sub in &self.session.subscriptions {
            if stream_matches(&sub.stream, event.stream()) {
                self.outbox.push(Frame::Notification(Notification {
                    subscription_id: sub.id,
                    event_time_ns: now,
                    event: event.clone(),
                }));
            }
        }
    }

    /// Reboot: running software follows the active slot, the session and
    /// all runtime carrier state are dropped.
    pub fn reboot(&mut self, now: Nanos) {
        if self.session.state != SessionState::Closed {
            self.transition(SessionState::Closed);
        }
        self.software.reset();
        self.deactivate_carriers(now, "reset");
        self.refresh_operational();
        self.log.push(
            now,
            EventCategory::Software,
            format!("reset: running {}", self.software.running().name),
        );
    }
}

fn ok_str<T>(r: &Result<T, RpcError>) -> &'static str {
    match r {
        Ok(_) => "ok",
        Err(e) => e.tag.as_str(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mplane::rpc::{Reply, SoftwareImage};
    use crate::mplane::software::SlotState;
    use crate::sim::NS_PER_S;

    fn config() -> ServerConfig {
        ServerConfig {
            credentials: Credentials::from_certificate("o-ru", "ru-cert"),
            trusted_client_fingerprint: Credentials::from_certificate("ter", "ter-cert")
                .fingerprint,
            software_build: "R1".into(),
        }
    }

    fn base_store(sync: &str) -> Datastore {
        let mut ds = Datastore::new();
        ds.set_leaf(model::SYNC_STATE, sync);
        ds.set_leaf("carriers/tx0/active", "false");
        ds.set_leaf("carriers/tx0/tx-power-dbm", "24");
        ds
    }

    fn client_hello(cert: &str) -> Frame {
        Frame::Hello(Hello {
            role: Role::Client,
            identity: "ter".into(),
            fingerprint: Credentials::from_certificate("ter", cert).fingerprint,
            session_id: None,
        })
    }

    fn established(sync: &str) -> MplaneServer {
        let mut s = MplaneServer::new(config(), base_store(sync));
        s.address_assigned(0, "fd00::10");
        s.call_home_connected(0, "[fd00::1]:4334");
        assert!(s.handle_frame(0, client_hello("ter-cert")).is_empty());
        assert_eq!(s.state(), SessionState::Established);
        s
    }

    fn rpc(s: &mut MplaneServer, now: Nanos, id: u64, op: Operation) -> RpcReply {
        s.handle_rpc(
            now,
            RpcRequest {
                message_id: id,
                operation: op,
            },
        )
    }

    #[test]
    fn rejects_wrong_fingerprint() {
        let mut s = MplaneServer::new(config(), base_store("LOCKED"));
        s.address_assigned(0, "fd00::10");
        s.call_home_connected(0, "ep");
        let out = s.handle_frame(0, client_hello("forged"));
        assert!(matches!(out.as_slice(), [Frame::Close { .. }]));
        assert_eq!(s.state(), SessionState::AddressAssigned);
        assert_eq!(s.auth_rejections(), 1);
    }

    #[test]
    fn rpc_before_established_is_refused() {
        let mut s = MplaneServer::new(config(), base_store("LOCKED"));
        let r = rpc(&mut s, 0, 1, Operation::Get);
        assert_eq!(r.rpc_error().unwrap().tag, ErrorTag::AccessDenied);
    }

    #[test]
    fn reply_echoes_message_id() {
        let mut s = established("LOCKED");
        for id in [1, 7, 99] {
            assert_eq!(rpc(&mut s, 0, id, Operation::Get).message_id, id);
        }
    }

    #[test]
    fn activation_gate_and_atomicity() {
        let mut s = established("FREERUN");
        let before = s.datastore().clone();
        let r = rpc(
            &mut s,
            0,
            1,
            Operation::EditConfig {
                changes: vec![
                    ConfigChange::new("carriers/tx0/tx-power-dbm", "30"),
                    ConfigChange::new("carriers/tx0/active", "true"),
                ],
            },
        );
        let e = r.rpc_error().unwrap();
        assert_eq!(e.tag, ErrorTag::OperationFailed);
        assert_eq!(e.path.as_deref(), Some("carriers/tx0/active"));
        assert_eq!(s.datastore(), &before);

        let mut s = established("LOCKED");
        let r = rpc(
            &mut s,
            0,
            1,
            Operation::EditConfig {
                changes: vec![ConfigChange::new("carriers/tx0/active", "true")],
            },
        );
        assert!(r.is_ok());
        assert_eq!(s.datastore().leaf("carriers/tx0/active"), Some("true"));
    }

    #[test]
    fn out_of_range_and_unknown() {
        let mut s = established("LOCKED");
        let edit = |path: &str, v: &str| Operation::EditConfig {
            changes: vec![ConfigChange::new(path, v)],
        };
        let r = rpc(&mut s, 0, 1, edit("carriers/tx0/tx-power-dbm", "99"));
        assert_eq!(r.rpc_error().unwrap().tag, ErrorTag::InvalidValue);
        assert_eq!(s.datastore().leaf("carriers/tx0/tx-power-dbm"), Some("24"));
        let r = rpc(&mut s, 0, 2, edit("sync/sync-state", "LOCKED"));
        assert_eq!(r.rpc_error().unwrap().tag, ErrorTag::UnknownElement);
        let r = rpc(&mut s, 0, 3, edit("carriers/tx9/active", "false"));
        assert_eq!(r.rpc_error().unwrap().tag, ErrorTag::UnknownElement);

        s.faults.reject_config_node = Some("carriers/tx0/tx-power-dbm".into());
        let r = rpc(&mut s, 0, 4, edit("carriers/tx0/tx-power-dbm", "99"));
        assert_eq!(r.rpc_error().unwrap().tag, ErrorTag::OperationFailed);
    }

    #[test]
    fn notifications_follow_subscription() {
        let alarm = |t| Alarm {
            fault_id: 9,
            fault_source: "pa".into(),
            severity: Severity::Minor,
            is_cleared: false,
            event_time_ns: t,
            text: String::new(),
        };
        let mut s = established("LOCKED");
        s.raise_alarm(alarm(1));
        assert!(s.take_outbox().is_empty());
        rpc(
            &mut s,
            2,
            1,
            Operation::Subscribe {
                stream: STREAM_ALARM.into(),
            },
        );
        rpc(
            &mut s,
            2,
            2,
            Operation::Subscribe {
                stream: STREAM_ALARM.into(),
            },
        );
        s.raise_alarm(alarm(3));
        let out = s.take_outbox();
        assert_eq!(out.len(), 1);
        assert!(
            matches!(&out[0], Frame::Notification(n) if matches!(n.event, NotificationEvent::Alarm(_)))
        );

        rpc(
            &mut s,
            4,
            3,
            Operation::Subscribe {
                stream: STREAM_ALL.into(),
            },
        );
        s.raise_alarm(alarm(5));
        let ids: Vec<u64> = s
            .take_outbox()
            .iter()
            .map(|f| match f {
                Frame::Notification(n) => n.subscription_id,
                _ => panic!(),
            })
            .collect();
        assert_eq!(ids, [1, 2]);
    }

    #[test]
    fn supervision_expiry_closes_and_deactivates() {
        let mut s = established("LOCKED");
        rpc(
            &mut s,
            0,
            1,
            Operation::EditConfig {
                changes: vec![ConfigChange::new("carriers/tx0/active", "true")],
            },
        );
        let kick = Operation::SupervisionKick {
            interval_s: 60,
            guard_s: 10,
        };
        assert!(rpc(&mut s, 0, 2, kick.clone()).is_ok());
        assert_eq!(s.state(), SessionState::Supervised);
        assert!(rpc(&mut s, 60 * NS_PER_S, 3, kick.clone()).is_ok());
        assert_eq!(s.supervision_deadline(), Some(130 * NS_PER_S));
        assert!(s.on_timer(130 * NS_PER_S - 1).is_empty());
        let out = s.on_timer(130 * NS_PER_S);
        assert!(matches!(out.as_slice(), [Frame::Close { .. }]));
        assert_eq!(s.state(), SessionState::Closed);
        assert_eq!(s.datastore().leaf("carriers/tx0/active"), Some("false"));
        assert!(s.alarms().is_active(FAULT_SUPERVISION));
    }

    #[test]
    fn kick_at_expiry_is_late() {
        let mut s = established("LOCKED");
        let kick = Operation::SupervisionKick {
            interval_s: 60,
            guard_s: 10,
        };
        rpc(&mut s, 0, 1, kick.clone());
        let r = rpc(&mut s, 70 * NS_PER_S, 2, kick);
        assert!(r.rpc_error().is_some());
        assert_eq!(s.state(), SessionState::Closed);
    }

    #[test]
    fn withheld_ack_lets_timer_expire() {
        let mut s = established("LOCKED");
        s.faults.withhold_supervision_ack = true;
        let kick = Operation::SupervisionKick {
            interval_s: 60,
            guard_s: 10,
        };
        assert!(rpc(&mut s, 0, 1, kick.clone()).is_ok());
        assert!(rpc(&mut s, 60 * NS_PER_S, 2, kick).rpc_error().is_some());
        assert_eq!(s.supervision_deadline(), Some(70 * NS_PER_S));
    }

    #[test]
    fn software_and_logs() {
        let mut s = established("LOCKED");
        assert_eq!(
            rpc(&mut s, 0, 1, Operation::LogCollect)
                .rpc_error()
                .unwrap()
                .tag,
            ErrorTag::DataMissing
        );
        rpc(
            &mut s,
            0,
            2,
            Operation::LogStart {
                kind: crate::mplane::rpc::LogKind::Troubleshooting,
            },
        );
        let image = SoftwareImage::new("R2", b"payload".to_vec());
        let r = rpc(&mut s, 1, 3, Operation::SwDownload { image });
        assert_eq!(r.data_value().unwrap()["status"], "VALID");
        assert!(rpc(
            &mut s,
            2,
            4,
            Operation::SwInstall {
                slot: "slot-b".into()
            }
        )
        .is_ok());
        assert!(rpc(
            &mut s,
            3,
            5,
            Operation::SwActivate {
                slot: "slot-b".into()
            }
        )
        .is_ok());
        rpc(&mut s, 4, 6, Operation::LogStop);
        let r = rpc(&mut s, 5, 7, Operation::LogCollect);
        let Reply::Data(v) = &r.reply else { panic!() };
        assert_eq!(v["events"].as_array().unwrap().len(), 3);
        assert_eq!(
            s.datastore().leaf("software/slots/slot-b/status"),
            Some(SlotState::Valid.as_str())
        );

        assert!(rpc(&mut s, 6, 8, Operation::Reset).is_ok());
        assert!(s.take_pending_reset());
        s.reboot(7);
        assert_eq!(s.software().running().name, "slot-b");
        assert_eq!(
            s.datastore().leaf("software/slots/slot-b/running"),
            Some("true")
        );
        assert_eq!(s.state(), SessionState::Closed);
    }
}
