//! Test bench: the TER (management client, PTP grandmaster, fronthaul
//! stimulus and capture) wired to one emulated O-RU on a shared simulated
//! timeline.

use std::collections::VecDeque;
use std::net::{Ipv6Addr, SocketAddrV6, TcpListener};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::codec::{CaptureDirection, CaptureRecord};
use crate::cuplane::TimedMessage;
use crate::mplane::dhcp::DhcpMessage;
use crate::mplane::model::VENDOR_CARRIER_ACTIVATION;
use crate::mplane::rpc::RpcRequest;
use crate::mplane::session::{DEFAULT_SUPERVISION_GUARD_S, DEFAULT_SUPERVISION_INTERVAL_S};
use crate::mplane::{
    dhcpv6_assign, ClientConfig, Credentials, DhcpError, DhcpLease, DhcpServer, HermeticNetwork,
    MplaneClient, MplaneError, Operation, RpcReply, RpcTarget, TcpTransport, Transport,
    CALL_HOME_PORT,
};
use crate::ru::{
    FaultPlan, OruEmulator, RuConfig, RuEnvironment, RuError, RuPhase, VendorActivation,
    DEFAULT_TER_CERTIFICATE,
};
use crate::sim::{derive_seed, Nanos, Timeline, NS_PER_MS, NS_PER_S};
use crate::splane::{PathModel, PtpFlow, PtpProfileConfig, PtpStats, SyncState, SyncTestbed};

/// How the management plane is carried between TER and O-RU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    /// In-process channels; fully deterministic.
    #[default]
    Hermetic,
    /// Length-prefixed frames over TCP on the IPv6 loopback.
    Tcp,
}

pub const TER_ADDRESS: Ipv6Addr = Ipv6Addr::new(0xfd00, 0, 0, 0, 0, 0, 0, 1);
pub const DHCP_POOL_BASE: Ipv6Addr = Ipv6Addr::new(0xfd00, 0, 0, 0, 0, 0, 0, 0x100);

#[derive(Debug, Clone)]
pub struct TestbedConfig {
    pub ru: RuConfig,
    pub faults: FaultPlan,
    pub transport: TransportMode,
    pub ter_identity: String,
    pub ter_certificate: String,
    pub trusted_ru_fingerprint: String,
    pub seed: u64,
    /// Wall-clock bound on one RPC over TCP.
    pub rpc_timeout: Duration,
    /// Supervision parameters sent with every kick.
    pub kick_interval_s: u64,
    pub kick_guard_s: u64,
}

impl Default for TestbedConfig {
    fn default() -> Self {
        let ru = RuConfig::default();
        Self {
            trusted_ru_fingerprint: ru.credentials().fingerprint,
            ru,
            faults: FaultPlan::default(),
            transport: TransportMode::Hermetic,
            ter_identity: "ter".into(),
            ter_certificate: DEFAULT_TER_CERTIFICATE.into(),
            seed: 0,
            rpc_timeout: Duration::from_secs(5),
            kick_interval_s: DEFAULT_SUPERVISION_INTERVAL_S,
            kick_guard_s: DEFAULT_SUPERVISION_GUARD_S,
        }
    }
}

/// Network between the two ends: DHCP service plus the Call Home
/// listener. Connections opened by the O-RU are queued for the TER.
struct Fabric {
    dhcp: DhcpServer,
    net: HermeticNetwork,
    tcp: Option<TcpListener>,
    accepted: VecDeque<Box<dyn Transport>>,
    dhcp_trace: Vec<DhcpMessage>,
}

impl Fabric {
    fn new(mode: TransportMode) -> Result<Self, MplaneError> {
        let (listen, tcp) = match mode {
            TransportMode::Hermetic => (SocketAddrV6::new(TER_ADDRESS, CALL_HOME_PORT, 0, 0), None),
            TransportMode::Tcp => {
                let l = TcpListener::bind((Ipv6Addr::LOCALHOST, 0))?;
                let port = l.local_addr()?.port();
                (SocketAddrV6::new(Ipv6Addr::LOCALHOST, port, 0, 0), Some(l))
            }
        };
        let mut net = HermeticNetwork::default();
        net.listen(listen);
        Ok(Self {
            dhcp: DhcpServer::new(DHCP_POOL_BASE, 64, listen),
            net,
            tcp,
            accepted: VecDeque::new(),
            dhcp_trace: Vec::new(),
        })
    }

    fn listen_addr(&self) -> SocketAddrV6 {
        self.dhcp.call_home_client()
    }
}

impl RuEnvironment for Fabric {
    fn dhcp(&mut self, duid: &[u8]) -> Result<(DhcpLease, Vec<DhcpMessage>), DhcpError> {
        let (lease, trace) = dhcpv6_assign(&mut self.dhcp, duid)?;
        self.dhcp_trace.extend(trace.iter().cloned());
        Ok((lease, trace))
    }

    fn call_home(&mut self, to: SocketAddrV6) -> Result<Box<dyn Transport>, MplaneError> {
        match &self.tcp {
            None => {
                let ru_end = self.net.connect(to)?;
                let ter_end = self.net.accept(&to).expect("connection just queued");
                self.accepted.push_back(Box::new(ter_end));
                Ok(Box::new(ru_end))
            }
            Some(listener) => {
                if to != self.listen_addr() {
                    return Err(MplaneError::Unreachable(to.to_string()));
                }
                let ru_end = TcpTransport::connect(to.into(), Duration::from_secs(2))?;
                let (stream, _) = listener.accept()?;
                stream.set_nonblocking(true)?;
                self.accepted
                    .push_back(Box::new(TcpTransport::new(stream)?));
                Ok(Box::new(ru_end))
            }
        }
    }
}

pub struct Testbed {
    now: Nanos,
    pub ru: OruEmulator,
    pub client: MplaneClient,
    fabric: Fabric,
    mode: TransportMode,
    rpc_timeout: Duration,
    cu_queue: Timeline<Vec<u8>>,
    ul_rx: Vec<(Nanos, Vec<u8>)>,
    fh_capture: Vec<CaptureRecord>,
    flow: Option<PtpFlow>,
    seed: u64,
    auto_kick: Option<(Nanos, Nanos)>,
    kick: (u64, u64),
    /// Frames written by either end when the wire was last seen idle.
    settled_sends: u64,
}

impl Testbed {
    pub fn new(mut cfg: TestbedConfig) -> Result<Self, TestbedError> {
        cfg.ru.clock.rng_seed = derive_seed(cfg.seed, "ru-clock");
        let fabric = Fabric::new(cfg.transport)?;
        let client = MplaneClient::new(ClientConfig {
            credentials: Credentials::from_certificate(&cfg.ter_identity, &cfg.ter_certificate),
            trusted_server_fingerprint: cfg.trusted_ru_fingerprint.clone(),
            listen: fabric.listen_addr(),
        });
        Ok(Self {
            now: 0,
            ru: OruEmulator::new(cfg.ru, cfg.faults)?,
            client,
            fabric,
            mode: cfg.transport,
            rpc_timeout: cfg.rpc_timeout,
            cu_queue: Timeline::new(),
            ul_rx: Vec::new(),
            fh_capture: Vec::new(),
            flow: None,
            seed: cfg.seed,
            auto_kick: None,
            kick: (cfg.kick_interval_s, cfg.kick_guard_s),
            settled_sends: 0,
        })
    }

    pub fn now(&self) -> Nanos {
        self.now
    }

    pub fn mode(&self) -> TransportMode {
        self.mode
    }

    /// One supervision kick with the configured interval and guard.
    pub fn kick(&self) -> Operation {
        Operation::SupervisionKick {
            interval_s: self.kick.0,
            guard_s: self.kick.1,
        }
    }

    /// Time a session survives without kicks.
    pub fn supervision_span(&self) -> Nanos {
        (self.kick.0 + self.kick.1) * NS_PER_S
    }

    pub fn call_home_address(&self) -> SocketAddrV6 {
        self.fabric.listen_addr()
    }

    pub fn dhcp_trace(&self) -> &[DhcpMessage] {
        &self.fabric.dhcp_trace
    }

    pub fn power_on(&mut self) {
        self.client.listen();
        self.ru.power_on(self.now);
        self.step(self.now);
    }

    /// Runs the timeline up to and including `target`.
    pub fn advance_to(&mut self, target: Nanos) {
        if target < self.now {
            return;
        }
        loop {
            let next = [
                self.ru.next_deadline(),
                self.cu_queue.peek_time(),
                self.flow.as_ref().and_then(PtpFlow::next_event_time),
            ]
            .into_iter()
            .chain([self.auto_kick.map(|(_, next)| next)])
            .flatten()
            .filter(|t| *t > self.now && *t <= target)
            .min();
            match next {
                Some(t) => self.step(t),
                None => {
                    self.step(target);
                    return;
                }
            }
        }
    }

    pub fn advance_by(&mut self, d: Nanos) {
        self.advance_to(self.now + d);
    }

    /// Advances in `step` increments until `done` holds or `budget` elapses.
    pub fn run_until(
        &mut self,
        budget: Nanos,
        step: Nanos,
        mut done: impl FnMut(&Self) -> bool,
    ) -> bool {
        let end = self.now + budget;
        loop {
            if done(self) {
                return true;
            }
            if self.now >= end {
                return false;
            }
            self.advance_to((self.now + step).min(end));
        }
    }

    fn step(&mut self, t: Nanos) {
        self.now = t;
        match self.flow.as_mut() {
            Some(f) => self.ru.receive_ptp(f, t),
            None => self.ru.sync_tick(t),
        }
        self.ru.advance(t, &mut self.fabric);
        while let Some((at, bytes)) = self.cu_queue.pop_until(t) {
            self.fh_capture.push(CaptureRecord {
                time_ns: at,
                direction: CaptureDirection::ToDut,
                bytes: bytes.clone(),
            });
            self.ru.receive_fronthaul(at, &bytes);
        }
        if let Some((period, next)) = self.auto_kick {
            if t >= next && self.client.state().is_up() {
                let _ = self.client.send(t, self.kick());
                self.auto_kick = Some((period, t + period));
            }
        }
        for (at, bytes) in self.ru.take_fronthaul_out() {
            self.fh_capture.push(CaptureRecord {
                time_ns: at,
                direction: CaptureDirection::FromDut,
                bytes: bytes.clone(),
            });
            self.ul_rx.push((at, bytes));
        }
        self.pump();
    }

    /// Exchanges management frames until both ends are idle.
    pub fn pump(&mut self) {
        let settle = match self.mode {
            TransportMode::Hermetic => 0,
            TransportMode::Tcp => 3,
        };
        let mut quiet = 0;
        loop {
            let mut n = self.ru.poll_mplane(self.now);
            n += self.client.poll(self.now).unwrap_or_else(|_| {
                self.client.close(self.now, "malformed frame");
                1
            });
            while let Some(t) = self.fabric.accepted.pop_front() {
                if self.client.attach(t).is_ok() {
                    n += 1;
                }
            }
            if n > 0 {
                quiet = 0;
                continue;
            }
            // Nothing written since the wire last went idle: nothing in flight.
            let sent = self.client.frames_sent() + self.ru.mplane_frames_sent();
            if quiet >= settle || sent == self.settled_sends {
                self.settled_sends = sent;
                return;
            }
            quiet += 1;
            std::thread::sleep(Duration::from_millis(1));
        }
    }

    pub fn session_up(&self) -> bool {
        self.client.state().is_up() && self.ru.session_state().is_up()
    }

    /// Sends one RPC and waits for its reply without advancing simulated time.
    pub fn call(&mut self, op: Operation) -> Result<RpcReply, MplaneError> {
        let id = self.client.send(self.now, op)?;
        let deadline = Instant::now() + self.rpc_timeout;
        loop {
            self.pump();
            if let Some(r) = self.client.take_reply(id) {
                return Ok(r);
            }
            if self.mode == TransportMode::Hermetic || Instant::now() >= deadline {
                return Err(MplaneError::NoReply(id));
            }
            if !self.client.is_connected() {
                return Err(MplaneError::Closed);
            }
        }
    }

    /// Sends an RPC whose reply is not awaited.
    pub fn send(&mut self, op: Operation) -> Result<u64, MplaneError> {
        let id = self.client.send(self.now, op)?;
        self.pump();
        Ok(id)
    }

    /// Queues fronthaul messages for delivery at their send times.
    pub fn queue_fronthaul(&mut self, msgs: impl IntoIterator<Item = TimedMessage>) {
        for m in msgs {
            self.cu_queue
                .schedule(m.send_time_ns.max(self.now), m.bytes);
        }
    }

    /// Uplink U-Plane frames received from the O-RU so far.
    pub fn take_uplink(&mut self) -> Vec<(Nanos, Vec<u8>)> {
        std::mem::take(&mut self.ul_rx)
    }

    pub fn fronthaul_capture(&self) -> &[CaptureRecord] {
        &self.fh_capture
    }

    pub fn start_grandmaster(&mut self, profile: PtpProfileConfig, path: PathModel) {
        let seed = derive_seed(self.seed, &format!("ptp-{}", self.ru.boot_count()));
        self.flow = Some(PtpFlow::new(profile, path, seed, self.now));
    }

    pub fn stop_grandmaster(&mut self) {
        if let Some(f) = self.flow.as_mut() {
            f.stop();
        }
    }

    pub fn ptp_flow(&self) -> Option<&PtpFlow> {
        self.flow.as_ref()
    }

    /// Keeps the session supervised by kicking every `period` from now on.
    pub fn set_auto_supervision(&mut self, period: Option<Nanos>) {
        self.auto_kick = period.map(|p| (p, self.now));
        if period.is_some() {
            self.step(self.now);
        }
    }

    /// Powers on if needed and waits for an established session.
    pub fn establish(&mut self, budget: Nanos) -> bool {
        if self.ru.phase_history().is_empty() {
            self.power_on();
        }
        self.run_until(budget, POLL_NS, Testbed::session_up)
    }

    /// Starts the grandmaster and polls the management plane until LOCKED.
    pub fn acquire_lock(
        &mut self,
        profile: PtpProfileConfig,
        path: PathModel,
        budget: Nanos,
    ) -> Result<bool, MplaneError> {
        if self.flow.as_ref().is_none_or(|f| !f.is_running()) {
            self.start_ptp(profile, path)?;
        }
        let end = self.now + budget;
        loop {
            if self.read_sync_state()? == SyncState::Locked {
                return Ok(true);
            }
            if self.now >= end {
                return Ok(false);
            }
            self.advance_to((self.now + POLL_NS).min(end));
        }
    }

    /// Reads the vendor activation document and applies it as one edit.
    pub fn activate_carriers(&mut self) -> Result<RpcReply, MplaneError> {
        let doc = self.call(Operation::GetWithFilter {
            filter: VENDOR_CARRIER_ACTIVATION.into(),
        })?;
        let steps = doc
            .fragment()
            .and_then(|n| {
                VENDOR_CARRIER_ACTIVATION
                    .split('/')
                    .try_fold(n, |n, seg| n.child(seg).cloned())
            })
            .and_then(|n| VendorActivation::from_subtree(&n))
            .filter(|s| !s.is_empty())
            .ok_or_else(|| {
                MplaneError::Malformed("vendor carrier activation document missing".into())
            })?;
        self.call(Operation::EditConfig {
            changes: VendorActivation::changes(&steps),
        })
    }

    /// Session, lock, and active carriers: the precondition of every
    /// fronthaul case.
    pub fn bring_up(&mut self, profile: PtpProfileConfig, path: PathModel) -> Result<(), String> {
        if !self.establish(BRING_UP_BUDGET) {
            return Err(format!(
                "no management session (O-RU phase {})",
                self.ru.phase().as_str()
            ));
        }
        match self.acquire_lock(profile, path, BRING_UP_BUDGET) {
            Ok(true) => {}
            Ok(false) => return Err("O-RU did not report LOCKED".into()),
            Err(e) => return Err(format!("sync query failed: {e}")),
        }
        let r = self
            .activate_carriers()
            .map_err(|e| format!("carrier activation: {e}"))?;
        if let Some(e) = r.rpc_error() {
            return Err(format!("carrier activation rejected: {}", e.message));
        }
        if self.ru.phase() != RuPhase::CarriersActive {
            return Err(format!(
                "O-RU phase {} after activation",
                self.ru.phase().as_str()
            ));
        }
        Ok(())
    }

    /// Sync state as reported over the management plane.
    pub fn read_sync_state(&mut self) -> Result<SyncState, MplaneError> {
        let r = self.call(Operation::GetWithFilter {
            filter: crate::mplane::model::SYNC_STATE.into(),
        })?;
        let leaf = r
            .fragment()
            .and_then(|n| n.child("sync").and_then(|s| s.child("sync-state")).cloned())
            .and_then(|n| n.as_leaf().map(str::to_string))
            .ok_or_else(|| MplaneError::Malformed("sync-state missing from reply".into()))?;
        SyncState::parse(&leaf)
            .ok_or_else(|| MplaneError::Malformed(format!("sync-state {leaf:?}")))
    }
}

impl SyncTestbed for Testbed {
    fn now(&self) -> Nanos {
        self.now
    }

    fn start_ptp(&mut self, profile: PtpProfileConfig, path: PathModel) -> Result<(), MplaneError> {
        if !self.session_up() {
            return Err(MplaneError::NotEstablished(
                self.client.state().as_str().into(),
            ));
        }
        self.start_grandmaster(profile, path);
        Ok(())
    }

    fn advance_to(&mut self, t: Nanos) {
        Testbed::advance_to(self, t);
    }

    fn query_sync_state(&mut self) -> Result<SyncState, MplaneError> {
        self.read_sync_state()
    }

    fn ptp_stats(&self) -> Option<PtpStats> {
        self.flow.as_ref().map(PtpFlow::stats)
    }

    fn time_error_ns(&self) -> f64 {
        self.ru.slave().time_error_ns(self.now)
    }
}

impl RpcTarget for Testbed {
    fn call(&mut self, request: RpcRequest) -> Result<RpcReply, MplaneError> {
        let mut reply = Testbed::call(self, request.operation)?;
        reply.message_id = request.message_id;
        Ok(reply)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TestbedError {
    #[error(transparent)]
    Ru(#[from] RuError),
    #[error(transparent)]
    Mplane(#[from] MplaneError),
}

impl From<std::io::Error> for TestbedError {
    fn from(e: std::io::Error) -> Self {
        TestbedError::Mplane(e.into())
    }
}

/// Poll period used while waiting on management-visible state.
pub const POLL_NS: Nanos = 100 * NS_PER_MS;
/// Budget for each bring-up stage.
pub const BRING_UP_BUDGET: Nanos = 60 * NS_PER_S;
