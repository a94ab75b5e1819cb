//! Reference O-RU: one state machine on the simulated timeline hosting the
//! management server, the PTP slave, and the fronthaul endpoint.

use std::collections::BTreeMap;
use std::net::SocketAddrV6;

use serde::{Deserialize, Serialize};

use super::faults::{FaultPlan, FaultToggle, UnknownToggle};
use super::fronthaul::{DlSection, FronthaulCounters, UlJob};
use super::vendor::VendorActivation;
use super::RuError;
use crate::codec::{CaptureDirection, CaptureRecord, CodecContext, EaxcLayout};
use crate::cuplane::{BeamTable, CarrierConfig, DelayWindow, VirtualRf};
use crate::mplane::alarm::FAULT_SYNC;
use crate::mplane::dhcp::DhcpMessage;
use crate::mplane::model::{self, carrier_path};
use crate::mplane::{
    Alarm, Credentials, Datastore, DhcpError, DhcpLease, Frame, MplaneError, MplaneServer,
    ServerConfig, SessionState, Severity, Transport,
};
use crate::sim::{Nanos, Timeline, NS_PER_S, NS_PER_US};
use crate::splane::{PtpFlow, PtpSlave, Servo, ServoConfig, SimClock, SimClockConfig, SyncState};

/// What the emulator needs from the network around it.
pub trait RuEnvironment {
    fn dhcp(&mut self, duid: &[u8]) -> Result<(DhcpLease, Vec<DhcpMessage>), DhcpError>;
    fn call_home(&mut self, to: SocketAddrV6) -> Result<Box<dyn Transport>, MplaneError>;
}

/// Boot and activation progress. Declaration order is progress order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuPhase {
    Boot,
    Dhcp,
    CallHome,
    MplaneUp,
    Syncing,
    Configured,
    CarriersActive,
}

impl RuPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            RuPhase::Boot => "BOOT",
            RuPhase::Dhcp => "DHCP",
            RuPhase::CallHome => "CALL_HOME",
            RuPhase::MplaneUp => "MPLANE_UP",
            RuPhase::Syncing => "SYNCING",
            RuPhase::Configured => "CONFIGURED",
            RuPhase::CarriersActive => "CARRIERS_ACTIVE",
        }
    }
}

pub const DEFAULT_RU_CERTIFICATE: &str = "reference o-ru device certificate";
pub const DEFAULT_TER_CERTIFICATE: &str = "test equipment operator certificate";
pub const DEFAULT_SOFTWARE_BUILD: &str = "ORU-1.0.0";

#[derive(Debug, Clone)]
pub struct RuConfig {
    pub identity: String,
    pub certificate: String,
    pub trusted_client_fingerprint: String,
    pub software_build: String,
    pub duid: Vec<u8>,
    pub carrier: CarrierConfig,
    pub eaxc_layout: EaxcLayout,
    pub window: DelayWindow,
    pub beam_table: BeamTable,
    pub clock: SimClockConfig,
    pub servo: ServoConfig,
    pub boot_time_ns: Nanos,
    pub call_home_retry_ns: Nanos,
    pub dhcp_retry_ns: Nanos,
    /// Receive processing between the end of a symbol and its U-Plane message.
    pub ul_processing_ns: Nanos,
    /// Delay after session establishment before a planned alarm fires.
    pub injected_alarm_delay_ns: Nanos,
    pub vendor: VendorActivation,
}

impl Default for RuConfig {
    fn default() -> Self {
        Self {
            identity: "o-ru-reference".into(),
            certificate: DEFAULT_RU_CERTIFICATE.into(),
            trusted_client_fingerprint: Credentials::from_certificate(
                "ter",
                DEFAULT_TER_CERTIFICATE,
            )
            .fingerprint,
            software_build: DEFAULT_SOFTWARE_BUILD.into(),
            duid: b"oru-ref-0001".to_vec(),
            carrier: CarrierConfig::default(),
            eaxc_layout: EaxcLayout::default(),
            window: DelayWindow::default(),
            beam_table: BeamTable::synthetic(),
            clock: SimClockConfig::default(),
            servo: ServoConfig::default(),
            boot_time_ns: 2 * NS_PER_S,
            call_home_retry_ns: 5 * NS_PER_S,
            dhcp_retry_ns: 5 * NS_PER_S,
            ul_processing_ns: 30 * NS_PER_US,
            injected_alarm_delay_ns: NS_PER_S,
            vendor: VendorActivation::default(),
        }
    }
}

impl RuConfig {
    pub fn credentials(&self) -> Credentials {
        Credentials::from_certificate(&self.identity, &self.certificate)
    }

    pub fn validate(&self) -> Result<(), RuError> {
        self.carrier.validate()?;
        self.window.validate()?;
        self.eaxc_layout.validate()?;
        if self.beam_table.elements != self.carrier.ru_ports {
            return Err(RuError::Config(format!(
                "beam table has {} elements, carrier has {} RU ports",
                self.beam_table.elements, self.carrier.ru_ports
            )));
        }
        if self.duid.is_empty() {
            return Err(RuError::Config("empty DUID".into()));
        }
        Ok(())
    }
}

/// Externally observable or state-changing things the device did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum ActionKind {
    Boot {
        reason: String,
    },
    Dhcp {
        address: Option<String>,
        outcome: String,
    },
    CallHome {
        to: String,
        outcome: String,
    },
    Mplane {
        frame: String,
    },
    Fronthaul {
        bytes: usize,
    },
    Radio {
        slot: u64,
        symbol: u8,
    },
    Recovery {
        from: RuPhase,
        to: RuPhase,
        reason: String,
    },
}

impl ActionKind {
    /// Visible on a wire or over the air.
    pub fn is_external(&self) -> bool {
        !matches!(self, ActionKind::Boot { .. } | ActionKind::Recovery { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuAction {
    pub time_ns: Nanos,
    #[serde(flatten)]
    pub kind: ActionKind,
}

#[derive(Debug)]
enum RuEvent {
    BootDone,
    CallHome,
    InjectedAlarm { boot: u32 },
    Ul(UlJob),
}

pub struct OruEmulator {
    pub(super) cfg: RuConfig,
    pub(super) codec: CodecContext,
    pub(super) server: MplaneServer,
    transport: Option<Box<dyn Transport>>,
    lease: Option<DhcpLease>,
    pub(super) phase: RuPhase,
    phase_history: Vec<(Nanos, RuPhase)>,
    timeline: Timeline<RuEvent>,
    slave: PtpSlave,
    /// Absorbs PTP traffic the device is not listening to.
    deaf_slave: PtpSlave,
    faults: FaultPlan,
    pub(super) rf: VirtualRf,
    pub(super) pending: BTreeMap<(u16, u64, u16), DlSection>,
    pub(super) fh_out: Vec<(Nanos, Vec<u8>)>,
    pub(super) counters: FronthaulCounters,
    actions: Vec<RuAction>,
    powered: bool,
    boot_count: u32,
    ever_locked: bool,
    sync_alarm_active: bool,
    pub(super) ul_seq: BTreeMap<u16, u8>,
    mplane_sent: u64,
}

impl OruEmulator {
    pub fn new(cfg: RuConfig, faults: FaultPlan) -> Result<Self, RuError> {
        cfg.validate()?;
        let mut ds = Datastore::new();
        seed_datastore(&mut ds, &cfg);
        let mut server = MplaneServer::new(
            ServerConfig {
                credentials: cfg.credentials(),
                trusted_client_fingerprint: cfg.trusted_client_fingerprint.clone(),
                software_build: cfg.software_build.clone(),
            },
            ds,
        );
        server.faults = faults.server_faults();
        let codec = CodecContext {
            eaxc_layout: cfg.eaxc_layout,
            ru_ports: cfg.carrier.ru_ports,
            n_prb: cfg.carrier.n_prb,
        };
        let slave = PtpSlave::new(SimClock::new(cfg.clock), Servo::new(cfg.servo));
        let deaf_slave = PtpSlave::new(SimClock::ideal(), Servo::new(cfg.servo));
        let mut ru = Self {
            rf: VirtualRf::new(cfg.carrier.ru_ports),
            cfg,
            codec,
            server,
            transport: None,
            lease: None,
            phase: RuPhase::Boot,
            phase_history: Vec::new(),
            timeline: Timeline::new(),
            slave,
            deaf_slave,
            faults,
            pending: BTreeMap::new(),
            fh_out: Vec::new(),
            counters: FronthaulCounters::default(),
            actions: Vec::new(),
            powered: false,
            boot_count: 0,
            ever_locked: false,
            sync_alarm_active: false,
            ul_seq: BTreeMap::new(),
            mplane_sent: 0,
        };
        ru.counters.publish(ru.server.datastore_mut());
        Ok(ru)
    }

    pub fn config(&self) -> &RuConfig {
        &self.cfg
    }

    pub fn codec(&self) -> &CodecContext {
        &self.codec
    }

    pub fn phase(&self) -> RuPhase {
        self.phase
    }

    pub fn phase_history(&self) -> &[(Nanos, RuPhase)] {
        &self.phase_history
    }

    pub fn actions(&self) -> &[RuAction] {
        &self.actions
    }

    pub fn server(&self) -> &MplaneServer {
        &self.server
    }

    pub fn datastore(&self) -> &Datastore {
        self.server.datastore()
    }

    pub fn session_state(&self) -> SessionState {
        self.server.state()
    }

    pub fn lease(&self) -> Option<&DhcpLease> {
        self.lease.as_ref()
    }

    pub fn slave(&self) -> &PtpSlave {
        &self.slave
    }

    pub fn rf(&self) -> &VirtualRf {
        &self.rf
    }

    /// Air interface access for the virtual signal generator.
    pub fn rf_mut(&mut self) -> &mut VirtualRf {
        &mut self.rf
    }

    /// Management frames written since power-up of the emulator.
    pub fn mplane_frames_sent(&self) -> u64 {
        self.mplane_sent
    }

    pub fn counters(&self) -> &FronthaulCounters {
        &self.counters
    }

    pub fn faults(&self) -> &FaultPlan {
        &self.faults
    }

    pub fn boot_count(&self) -> u32 {
        self.boot_count
    }

    pub fn sync_state(&self) -> SyncState {
        self.slave.sync_state()
    }

    pub fn carriers_active(&self) -> bool {
        self.carrier_active("tx0") || self.carrier_active("rx0")
    }

    pub(super) fn carrier_active(&self, id: &str) -> bool {
        self.server.datastore().leaf(&carrier_path(id, "active")) == Some("true")
    }

    pub fn inject_fault(&mut self, now: Nanos, name: &str) -> Result<FaultToggle, UnknownToggle> {
        let toggle: FaultToggle = name.parse()?;
        self.faults.set(toggle);
        self.server.faults = self.faults.server_faults();
        if toggle == FaultToggle::RaiseAlarm && self.server.state().is_up() {
            self.timeline.schedule(
                now + self.cfg.injected_alarm_delay_ns,
                RuEvent::InjectedAlarm {
                    boot: self.boot_count,
                },
            );
        }
        Ok(toggle)
    }

    fn log(&mut self, now: Nanos, kind: ActionKind) {
        self.actions.push(RuAction { time_ns: now, kind });
    }

    fn set_phase(&mut self, now: Nanos, to: RuPhase, reason: &str) {
        if to == self.phase && !self.phase_history.is_empty() {
            return;
        }
        if to < self.phase && to != RuPhase::Boot {
            let from = self.phase;
            self.log(
                now,
                ActionKind::Recovery {
                    from,
                    to,
                    reason: reason.into(),
                },
            );
        }
        let entered_up = to >= RuPhase::MplaneUp && self.phase < RuPhase::MplaneUp;
        self.phase = to;
        self.phase_history.push((now, to));
        if entered_up && self.faults.raise_alarm.is_some() {
            self.timeline.schedule(
                now + self.cfg.injected_alarm_delay_ns,
                RuEvent::InjectedAlarm {
                    boot: self.boot_count,
                },
            );
        }
    }

    pub fn power_on(&mut self, now: Nanos) {
        if self.powered {
            return;
        }
        self.powered = true;
        self.start_boot(now, "power on");
    }

    fn start_boot(&mut self, now: Nanos, reason: &str) {
        self.boot_count += 1;
        self.timeline = Timeline::new();
        self.log(
            now,
            ActionKind::Boot {
                reason: reason.into(),
            },
        );
        self.set_phase(now, RuPhase::Boot, reason);
        self.timeline
            .schedule(now + self.cfg.boot_time_ns, RuEvent::BootDone);
    }

    /// Device restart: software follows the active slot, sessions, carriers,
    /// PTP state and scheduled radio work are dropped.
    fn restart(&mut self, now: Nanos, reason: &str) {
        self.transport = None;
        self.lease = None;
        self.server.reboot(now);
        self.slave.reset_protocol();
        self.deaf_slave.reset_protocol();
        self.ever_locked = false;
        self.reset_fronthaul();
        self.server
            .publish_sync_state(now, SyncState::Freerun.as_str());
        self.start_boot(now, reason);
    }

    /// Earliest instant at which the device has something to do.
    pub fn next_deadline(&self) -> Option<Nanos> {
        if !self.powered {
            return None;
        }
        let holdover = if self.faults.disable_sync {
            None
        } else {
            self.slave.servo.holdover_deadline()
        };
        [
            self.timeline.peek_time(),
            self.server.supervision_deadline(),
            holdover,
        ]
        .into_iter()
        .flatten()
        .min()
    }

    /// Runs timers and scheduled work due at or before `now`.
    pub fn advance(&mut self, now: Nanos, env: &mut dyn RuEnvironment) {
        if !self.powered {
            return;
        }
        loop {
            let sup = self.server.supervision_deadline().filter(|t| *t <= now);
            let ev = self.timeline.peek_time().filter(|t| *t <= now);
            match (sup, ev) {
                (Some(s), e) if e.is_none_or(|e| s <= e) => {
                    let frames = self.server.on_timer(s);
                    self.send_frames(s, frames);
                    self.restart(s, "supervision expired");
                }
                (_, Some(_)) => {
                    let (t, e) = self.timeline.pop().expect("peeked");
                    self.handle_event(t, e, env);
                }
                _ => break,
            }
        }
        self.sync_tick(now);
    }

    fn handle_event(&mut self, now: Nanos, ev: RuEvent, env: &mut dyn RuEnvironment) {
        match ev {
            RuEvent::BootDone => {
                self.set_phase(now, RuPhase::Dhcp, "boot complete");
                match env.dhcp(&self.cfg.duid) {
                    Ok((lease, _trace)) => {
                        let addr = lease.address.to_string();
                        self.log(
                            now,
                            ActionKind::Dhcp {
                                address: Some(addr.clone()),
                                outcome: "bound".into(),
                            },
                        );
                        self.server.address_assigned(now, &addr);
                        self.lease = Some(lease);
                        self.set_phase(now, RuPhase::CallHome, "address assigned");
                        self.timeline.schedule(now, RuEvent::CallHome);
                    }
                    Err(e) => {
                        self.log(
                            now,
                            ActionKind::Dhcp {
                                address: None,
                                outcome: e.to_string(),
                            },
                        );
                        self.timeline
                            .schedule(now + self.cfg.dhcp_retry_ns, RuEvent::BootDone);
                    }
                }
            }
            RuEvent::CallHome => self.call_home(now, env),
            RuEvent::InjectedAlarm { boot } => {
                if boot == self.boot_count && self.server.state().is_up() {
                    if let Some(mut alarm) = self.faults.raise_alarm.clone() {
                        alarm.event_time_ns = now;
                        self.server.raise_alarm(alarm);
                        self.flush(now);
                    }
                }
            }
            RuEvent::Ul(job) => self.run_ul_job(now, job),
        }
    }

    fn call_home(&mut self, now: Nanos, env: &mut dyn RuEnvironment) {
        if self.transport.is_some() || self.server.state() != SessionState::AddressAssigned {
            return;
        }
        let Some(to) = self.lease.as_ref().map(|l| l.call_home_client) else {
            return;
        };
        match env.call_home(to) {
            Ok(t) => {
                self.transport = Some(t);
                let hello = self.server.call_home_connected(now, &to.to_string());
                self.log(
                    now,
                    ActionKind::CallHome {
                        to: to.to_string(),
                        outcome: "connected".into(),
                    },
                );
                self.send_frames(now, vec![hello]);
            }
            Err(e) => {
                self.server.call_home_failed(now, &e.to_string());
                self.log(
                    now,
                    ActionKind::CallHome {
                        to: to.to_string(),
                        outcome: e.to_string(),
                    },
                );
                self.timeline
                    .schedule(now + self.cfg.call_home_retry_ns, RuEvent::CallHome);
            }
        }
    }

    fn send_frames(&mut self, now: Nanos, frames: Vec<Frame>) {
        for f in frames {
            let up = self.server.state().is_up();
            let Some(t) = self.transport.as_mut() else {
                return;
            };
            let kind = frame_kind(&f);
            if t.send(&f.to_bytes()).is_err() {
                self.transport_lost(now);
                return;
            }
            self.mplane_sent += 1;
            if up || self.phase >= RuPhase::MplaneUp {
                self.log(now, ActionKind::Mplane { frame: kind });
            } else if let Some(to) = self.lease.as_ref().map(|l| l.call_home_client.to_string()) {
                self.log(
                    now,
                    ActionKind::CallHome {
                        to,
                        outcome: format!("sent {kind}"),
                    },
                );
            }
        }
    }

    fn flush(&mut self, now: Nanos) {
        let out = self.server.take_outbox();
        self.send_frames(now, out);
    }

    fn transport_lost(&mut self, now: Nanos) {
        self.transport = None;
        let was_up = self.server.state().is_up();
        self.server.connection_lost(now);
        if was_up {
            self.restart(now, "management session lost");
        } else {
            self.server.rearm();
            self.timeline
                .schedule(now + self.cfg.call_home_retry_ns, RuEvent::CallHome);
        }
    }

    /// Drains the management transport. Returns the number of frames handled.
    pub fn poll_mplane(&mut self, now: Nanos) -> usize {
        let mut handled = 0;
        while let Some(t) = self.transport.as_mut() {
            let bytes = match t.try_recv() {
                Ok(Some(b)) => b,
                Ok(None) => break,
                Err(_) => {
                    self.transport_lost(now);
                    break;
                }
            };
            handled += 1;
            let replies = match Frame::from_bytes(&bytes) {
                Ok(f) => self.server.handle_frame(now, f),
                Err(_) => continue,
            };
            self.send_frames(now, replies);
            if self.server.take_pending_reset() {
                self.restart(now, "reset requested");
                break;
            }
            self.after_session_change(now);
        }
        if handled > 0 {
            self.refresh_phase(now);
        }
        handled
    }

    fn after_session_change(&mut self, now: Nanos) {
        match self.server.state() {
            SessionState::AddressAssigned if self.transport.is_some() => {
                // Authentication failed; the close already went out.
                self.transport = None;
                self.timeline
                    .schedule(now + self.cfg.call_home_retry_ns, RuEvent::CallHome);
            }
            SessionState::Closed if self.phase >= RuPhase::MplaneUp => {
                self.transport = None;
                self.restart(now, "management session closed by peer");
            }
            SessionState::Closed => {
                // Rejected by the peer during the handshake.
                self.transport = None;
                self.server.rearm();
                self.timeline
                    .schedule(now + self.cfg.call_home_retry_ns, RuEvent::CallHome);
            }
            _ => {}
        }
    }

    fn refresh_phase(&mut self, now: Nanos) {
        if self.phase < RuPhase::CallHome {
            return;
        }
        if !self.server.state().is_up() {
            return;
        }
        let target = if self.carriers_active() {
            RuPhase::CarriersActive
        } else if self.sync_state() == SyncState::Locked {
            RuPhase::Configured
        } else if self.slave.selected_master.is_some() {
            RuPhase::Syncing
        } else {
            RuPhase::MplaneUp
        };
        let reason = match target {
            RuPhase::Syncing | RuPhase::MplaneUp => "sync lost",
            _ => "carriers deactivated",
        };
        self.set_phase(now, target, reason);
    }

    fn listening_to_ptp(&self) -> bool {
        self.powered && !self.faults.disable_sync && self.phase >= RuPhase::CallHome
    }

    /// Delivers grandmaster traffic up to `until`.
    pub fn receive_ptp(&mut self, flow: &mut PtpFlow, until: Nanos) {
        if self.listening_to_ptp() {
            flow.advance(until, &mut self.slave);
        } else {
            flow.advance(until, &mut self.deaf_slave);
        }
        self.sync_tick(until);
    }

    /// Publishes the servo state and enforces the carrier gate.
    pub fn sync_tick(&mut self, now: Nanos) {
        if !self.powered {
            return;
        }
        let st = self.slave.servo.tick(now);
        if st != SyncState::Locked && self.carriers_active() {
            self.server.deactivate_carriers(now, "sync lost");
            self.pending.clear();
        }
        if st == SyncState::Locked {
            self.ever_locked = true;
            if self.sync_alarm_active {
                self.sync_alarm_active = false;
                self.server.raise_alarm(sync_alarm(now, true));
            }
        } else if self.ever_locked && !self.sync_alarm_active {
            self.sync_alarm_active = true;
            self.server.raise_alarm(sync_alarm(now, false));
        }
        self.server.publish_sync_state(now, st.as_str());
        self.refresh_phase(now);
        self.flush(now);
    }

    pub(super) fn schedule_ul(&mut self, at: Nanos, job: UlJob) {
        self.timeline.schedule(at, RuEvent::Ul(job));
    }

    pub(super) fn log_fronthaul(&mut self, now: Nanos, bytes: usize) {
        self.log(now, ActionKind::Fronthaul { bytes });
    }

    pub(super) fn log_radio(&mut self, now: Nanos, slot: u64, symbol: u8) {
        self.log(now, ActionKind::Radio { slot, symbol });
    }

    /// Uplink U-Plane messages produced so far, with their send times.
    pub fn take_fronthaul_out(&mut self) -> Vec<(Nanos, Vec<u8>)> {
        std::mem::take(&mut self.fh_out)
    }

    /// Action log as harness capture records, one JSON document each.
    pub fn action_capture(&self) -> Vec<CaptureRecord> {
        self.actions
            .iter()
            .map(|a| CaptureRecord {
                time_ns: a.time_ns,
                direction: CaptureDirection::Harness,
                bytes: serde_json::to_vec(a).expect("actions serialize"),
            })
            .collect()
    }
}

fn frame_kind(f: &Frame) -> String {
    match f {
        Frame::Hello(_) => "hello".into(),
        Frame::Rpc(r) => format!("rpc {}", r.operation.name()),
        Frame::RpcReply(r) => format!("rpc-reply {}", r.message_id),
        Frame::Notification(_) => "notification".into(),
        Frame::Close { .. } => "close".into(),
    }
}

fn sync_alarm(now: Nanos, cleared: bool) -> Alarm {
    Alarm {
        fault_id: FAULT_SYNC,
        fault_source: "sync".into(),
        severity: Severity::Major,
        is_cleared: cleared,
        event_time_ns: now,
        text: if cleared {
            "synchronization recovered".into()
        } else {
            "synchronization lost".into()
        },
    }
}

fn seed_datastore(ds: &mut Datastore, cfg: &RuConfig) {
    let c = &cfg.carrier;
    ds.set_leaf("hardware/identity", cfg.identity.clone());
    ds.set_leaf("hardware/ru-ports", c.ru_ports.to_string());
    ds.set_leaf("hardware/band", c.band.clone());
    ds.set_leaf("interfaces/eth0/description", "fronthaul");
    ds.set_leaf("interfaces/eth0/enabled", "true");
    ds.set_leaf(model::SYNC_STATE, SyncState::Freerun.as_str());
    ds.set_leaf("sync/ptp/domain-number", "24");
    ds.set_leaf(&format!("{}/operator/enabled", model::USERS), "true");
    ds.set_leaf(&format!("{}/operator/privilege", model::USERS), "sudo");
    for (id, gain_leaf, gain) in [("tx0", "tx-power-dbm", "0"), ("rx0", "gain-db", "0")] {
        ds.set_leaf(&carrier_path(id, "active"), "false");
        ds.set_leaf(
            &carrier_path(id, "center-frequency-khz"),
            c.center_frequency_khz.to_string(),
        );
        ds.set_leaf(
            &carrier_path(id, "bandwidth-mhz"),
            c.bandwidth_mhz.to_string(),
        );
        ds.set_leaf(&carrier_path(id, gain_leaf), gain);
        ds.set_leaf(&carrier_path(id, "eaxc-id"), "0");
    }
    ds.set_leaf(
        "windows/t2a-min-up-ns",
        cfg.window.t2a_min_up_ns.to_string(),
    );
    ds.set_leaf(
        "windows/t2a-max-up-ns",
        cfg.window.t2a_max_up_ns.to_string(),
    );
    ds.set_leaf(
        "windows/t2a-min-cp-ns",
        cfg.window.t2a_min_cp_ns.to_string(),
    );
    ds.set_leaf(
        "windows/t2a-max-cp-ns",
        cfg.window.t2a_max_cp_ns.to_string(),
    );
    cfg.vendor.publish(ds);
}
