//! Two-way time transfer, path models, and the message flow between the
//! grandmaster (test equipment) and the O-RU's slave clock.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::bmca::{bmca_select, AnnounceRecord};
use super::clock::SimClock;
use super::servo::{Servo, SyncState};
use crate::sim::{seeded_rng, Nanos, NS_PER_MS, NS_PER_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtpProfileConfig {
    pub domain_number: u8,
    pub announce_rate_hz: u32,
    pub sync_rate_hz: u32,
    pub delay_req_rate_hz: u32,
    pub two_step: bool,
}

pub const DOMAIN_RANGE: std::ops::RangeInclusive<u8> = 24..=43;

impl Default for PtpProfileConfig {
    fn default() -> Self {
        Self {
            domain_number: 24,
            announce_rate_hz: 8,
            sync_rate_hz: 16,
            delay_req_rate_hz: 16,
            two_step: false,
        }
    }
}

impl PtpProfileConfig {
    /// Static profile violations against the telecom profile defaults.
    pub fn violations(&self) -> Vec<String> {
        let required = Self::default();
        let mut v = Vec::new();
        if !DOMAIN_RANGE.contains(&self.domain_number) {
            v.push(format!("domain {} outside 24..=43", self.domain_number));
        }
        for (name, got, want) in [
            ("announce", self.announce_rate_hz, required.announce_rate_hz),
            ("sync", self.sync_rate_hz, required.sync_rate_hz),
            (
                "delay_req",
                self.delay_req_rate_hz,
                required.delay_req_rate_hz,
            ),
        ] {
            if got != want {
                v.push(format!("{name} rate {got} Hz, profile requires {want} Hz"));
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopModel {
    pub residence_ns: f64,
    pub jitter_std_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathModel {
    pub forward_delay_ns: f64,
    pub reverse_delay_ns: f64,
    pub hops: Vec<HopModel>,
}

impl PathModel {
    pub fn symmetric(delay_ns: f64) -> Self {
        Self {
            forward_delay_ns: delay_ns,
            reverse_delay_ns: delay_ns,
            hops: Vec::new(),
        }
    }

    /// Extra master-to-slave delay.
    pub fn with_asymmetry(mut self, a_ns: f64) -> Self {
        self.forward_delay_ns += a_ns;
        self
    }

    /// One-way delay; hop residence never goes negative.
    pub fn one_way(&self, forward: bool, rng: &mut ChaCha8Rng) -> f64 {
        let base = if forward {
            self.forward_delay_ns
        } else {
            self.reverse_delay_ns
        };
        base + self
            .hops
            .iter()
            .map(|h| {
                let j = if h.jitter_std_ns > 0.0 {
                    Normal::new(0.0, h.jitter_std_ns)
                        .expect("finite std")
                        .sample(rng)
                } else {
                    0.0
                };
                (h.residence_ns + j).max(0.0)
            })
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    #[serde(rename = "LLS-C1")]
    C1,
    #[serde(rename = "LLS-C2")]
    C2,
    #[serde(rename = "LLS-C3")]
    C3,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::C1, Topology::C2, Topology::C3];

    pub fn name(self) -> &'static str {
        match self {
            Topology::C1 => "LLS-C1",
            Topology::C2 => "LLS-C2",
            Topology::C3 => "LLS-C3",
        }
    }

    /// C1 is a direct link, C2 crosses two switches, C3 reaches a
    /// network grandmaster over three.
    pub fn default_path(self) -> PathModel {
        let hop = |residence_ns, jitter_std_ns| HopModel {
            residence_ns,
            jitter_std_ns,
        };
        match self {
            Topology::C1 => PathModel::symmetric(1_000.0),
            Topology::C2 => PathModel {
                hops: vec![hop(250.0, 4.0); 2],
                ..PathModel::symmetric(800.0)
            },
            Topology::C3 => PathModel {
                hops: vec![hop(300.0, 6.0); 3],
                ..PathModel::symmetric(600.0)
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeResult {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub offset_est_ns: f64,
    pub delay_est_ns: f64,
}

impl ExchangeResult {
    pub fn from_timestamps(t1: f64, t2: f64, t3: f64, t4: f64) -> Self {
        let ms = t2 - t1;
        let sm = t4 - t3;
        Self {
            t1,
            t2,
            t3,
            t4,
            offset_est_ns: (ms - sm) / 2.0,
            delay_est_ns: (ms + sm) / 2.0,
        }
    }
}

/// One sync plus delay-request exchange starting at true time `t`. The
/// slave answers `turnaround_ns` after the sync arrives.
pub fn ptp_exchange(
    master: &mut SimClock,
    slave: &mut SimClock,
    path: &PathModel,
    rng: &mut ChaCha8Rng,
    t: Nanos,
    turnaround_ns: Nanos,
) -> ExchangeResult {
    let t1 = master.read(t);
    let arrive = t + path.one_way(true, rng).round() as Nanos;
    let t2 = slave.read(arrive);
    let depart = arrive + turnaround_ns;
    let t3 = slave.read(depart);
    let back = depart + path.one_way(false, rng).round() as Nanos;
    let t4 = master.read(back);
    ExchangeResult::from_timestamps(t1, t2, t3, t4)
}

/// The O-RU's synchronization function.
#[derive(Debug, Clone)]
pub struct PtpSlave {
    pub clock: SimClock,
    pub servo: Servo,
    pub selected_master: Option<AnnounceRecord>,
    announces: Vec<AnnounceRecord>,
    pending_sync: Option<(f64, f64)>,
    last_exchange: Option<Nanos>,
}

impl PtpSlave {
    pub fn new(clock: SimClock, servo: Servo) -> Self {
        Self {
            clock,
            servo,
            selected_master: None,
            announces: Vec::new(),
            pending_sync: None,
            last_exchange: None,
        }
    }

    pub fn sync_state(&self) -> SyncState {
        self.servo.sync_state
    }

    /// Time error at the RF boundary: positive when the O-RU lags the
    /// reference.
    pub fn time_error_ns(&self, t: Nanos) -> f64 {
        -self.clock.offset_at(t)
    }

    fn on_announce(&mut self, a: AnnounceRecord) {
        if !self.announces.contains(&a) {
            self.announces.push(a);
        }
        self.selected_master = bmca_select(&self.announces);
    }

    /// Drops protocol state, keeping the oscillator.
    pub fn reset_protocol(&mut self) {
        let config = self.servo.config;
        self.servo = Servo::new(config);
        self.selected_master = None;
        self.announces.clear();
        self.pending_sync = None;
        self.last_exchange = None;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtpStats {
    pub announces: u64,
    pub syncs: u64,
    pub follow_ups: u64,
    pub delay_reqs: u64,
    pub exchanges: u64,
    pub started_at: Nanos,
    pub observed_until: Nanos,
}

impl PtpStats {
    fn window_s(&self) -> f64 {
        (self.observed_until.saturating_sub(self.started_at)) as f64 / NS_PER_S as f64
    }

    /// Messages per second over the observed window.
    pub fn rate_hz(&self, count: u64) -> f64 {
        let w = self.window_s();
        if w <= 0.0 {
            0.0
        } else {
            count as f64 / w
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum FlowEvent {
    Announce,
    Sync,
    DelayReq,
}

/// Delay requests trail the sync grid by this much.
const DELAY_REQ_PHASE_NS: Nanos = NS_PER_MS;

/// Grandmaster-to-slave message flow on a fixed schedule.
#[derive(Debug, Clone)]
pub struct PtpFlow {
    pub profile: PtpProfileConfig,
    pub path: PathModel,
    master: SimClock,
    announce: AnnounceRecord,
    rng: ChaCha8Rng,
    next: [(Nanos, u64); 3],
    stats: PtpStats,
    running: bool,
}

impl PtpFlow {
    pub fn new(profile: PtpProfileConfig, path: PathModel, seed: u64, start: Nanos) -> Self {
        Self {
            profile,
            path,
            master: SimClock::ideal(),
            announce: AnnounceRecord::grandmaster(0x00A0_C9FF_FE00_0001),
            rng: seeded_rng(seed, "ptp-path"),
            next: [(start, 0), (start, 0), (start + DELAY_REQ_PHASE_NS, 0)],
            stats: PtpStats {
                started_at: start,
                observed_until: start,
                ..Default::default()
            },
            running: true,
        }
    }

    pub fn stats(&self) -> PtpStats {
        self.stats
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn stop(&mut self) {
        self.running = false;
    }

    fn interval(rate_hz: u32) -> Nanos {
        NS_PER_S / rate_hz.max(1) as Nanos
    }

    fn schedule_of(&self, kind: FlowEvent) -> (Nanos, Nanos) {
        let (base, rate) = match kind {
            FlowEvent::Announce => (self.stats.started_at, self.profile.announce_rate_hz),
            FlowEvent::Sync => (self.stats.started_at, self.profile.sync_rate_hz),
            FlowEvent::DelayReq => (
                self.stats.started_at + DELAY_REQ_PHASE_NS,
                self.profile.delay_req_rate_hz,
            ),
        };
        (base, Self::interval(rate))
    }

    pub fn next_event_time(&self) -> Option<Nanos> {
        self.running.then(|| {
            self.next
                .iter()
                .map(|(t, _)| *t)
                .min()
                .expect("three streams")
        })
    }

    fn pop_next(&mut self, until: Nanos) -> Option<(Nanos, FlowEvent)> {
        if !self.running {
            return None;
        }
        let kinds = [FlowEvent::Announce, FlowEvent::Sync, FlowEvent::DelayReq];
        let (i, &(t, k)) = self
            .next
            .iter()
            .enumerate()
            .min_by_key(|(i, (t, _))| (*t, *i))?;
        if t > until {
            return None;
        }
        let (base, step) = self.schedule_of(kinds[i]);
        self.next[i] = (base + (k + 1) * step, k + 1);
        Some((t, kinds[i]))
    }

    /// Processes every flow event up to and including `until`.
    pub fn advance(&mut self, until: Nanos, slave: &mut PtpSlave) {
        while let Some((t, ev)) = self.pop_next(until) {
            match ev {
                FlowEvent::Announce => {
                    self.stats.announces += 1;
                    slave.on_announce(self.announce);
                }
                FlowEvent::Sync => {
                    self.stats.syncs += 1;
                    if self.profile.two_step {
                        self.stats.follow_ups += 1;
                    }
                    let t1 = self.master.read(t);
                    let arrive = t + self.path.one_way(true, &mut self.rng).round() as Nanos;
                    let t2 = slave.clock.read(arrive);
                    slave.pending_sync = Some((t1, t2));
                }
                FlowEvent::DelayReq => {
                    self.stats.delay_reqs += 1;
                    let t3 = slave.clock.read(t);
                    let back = t + self.path.one_way(false, &mut self.rng).round() as Nanos;
                    let t4 = self.master.read(back);
                    if let (Some((t1, t2)), Some(_)) =
                        (slave.pending_sync.take(), slave.selected_master)
                    {
                        let r = ExchangeResult::from_timestamps(t1, t2, t3, t4);
                        let interval_s = match slave.last_exchange {
                            Some(prev) => (t - prev) as f64 / NS_PER_S as f64,
                            None => {
                                Self::interval(self.profile.delay_req_rate_hz) as f64
                                    / NS_PER_S as f64
                            }
                        };
                        slave
                            .servo
                            .update(t, r.offset_est_ns, interval_s, &mut slave.clock);
                        slave.last_exchange = Some(t);
                        self.stats.exchanges += 1;
                    }
                }
            }
            slave.servo.tick(t);
        }
        if until > self.stats.observed_until {
            self.stats.observed_until = until;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splane::clock::SimClockConfig;
    use crate::splane::servo::ServoConfig;
    use proptest::prelude::*;

    fn clock(phase: f64) -> SimClock {
        SimClock::new(SimClockConfig {
            phase_offset_ns: phase,
            freq_offset_ppb: 0.0,
            noise_std_ns: 0.0,
            rng_seed: 3,
        })
    }

    fn rng() -> ChaCha8Rng {
        seeded_rng(1, "test")
    }

    #[test]
    fn symmetric_recovers_offset() {
        let r = ptp_exchange(
            &mut SimClock::ideal(),
            &mut clock(37.5),
            &PathModel::symmetric(900.0),
            &mut rng(),
            1_000,
            50,
        );
        assert_eq!(r.offset_est_ns, 37.5);
        assert_eq!(r.delay_est_ns, 900.0);
    }

    #[test]
    fn asymmetry_shows_as_half() {
        let path = PathModel::symmetric(500.0).with_asymmetry(200.0);
        let r = ptp_exchange(
            &mut SimClock::ideal(),
            &mut clock(0.0),
            &path,
            &mut rng(),
            0,
            10,
        );
        assert_eq!(r.offset_est_ns, 100.0);
    }

    #[test]
    fn degenerate_zero_path() {
        let r = ptp_exchange(
            &mut SimClock::ideal(),
            &mut clock(0.0),
            &PathModel::symmetric(0.0),
            &mut rng(),
            0,
            0,
        );
        assert_eq!((r.t1, r.t3), (r.t2, r.t4));
        assert_eq!(r.offset_est_ns, 0.0);
    }

    proptest! {
        #[test]
        fn symmetric_exact_for_all(delay in 0u32..5_000_000, offset in -1e6f64..1e6, t in 0u64..1_000_000_000_000) {
            let r = ptp_exchange(&mut SimClock::ideal(), &mut clock(offset), &PathModel::symmetric(delay as f64), &mut rng(), t, 1_000);
            prop_assert!((r.offset_est_ns - offset).abs() < 1e-3);
        }

        #[test]
        fn hop_delays_non_negative(res in 0f64..100.0, jit in 0f64..500.0, seed in any::<u64>()) {
            let p = PathModel { hops: vec![HopModel { residence_ns: res, jitter_std_ns: jit }; 3], ..PathModel::symmetric(0.0) };
            let mut r = seeded_rng(seed, "hops");
            prop_assert!(p.one_way(true, &mut r) >= 0.0);
        }
    }

    #[test]
    fn profile_violations() {
        assert!(PtpProfileConfig::default().violations().is_empty());
        let bad = PtpProfileConfig {
            announce_rate_hz: 1,
            domain_number: 5,
            ..Default::default()
        };
        assert_eq!(bad.violations().len(), 2);
    }

    #[test]
    fn flow_rates_and_lock() {
        let mut flow = PtpFlow::new(
            PtpProfileConfig::default(),
            Topology::C1.default_path(),
            9,
            0,
        );
        let mut slave = PtpSlave::new(clock(800.0), Servo::new(ServoConfig::default()));
        flow.advance(10 * NS_PER_S, &mut slave);
        let s = flow.stats();
        assert_eq!(s.announces, 81);
        assert_eq!(s.syncs, 161);
        assert_eq!(s.delay_reqs, 160);
        assert!((s.rate_hz(s.announces) - 8.1).abs() < 1e-9);
        assert_eq!(slave.sync_state(), SyncState::Locked);
        assert!(slave.time_error_ns(10 * NS_PER_S).abs() < 10.0);
    }

    #[test]
    fn steady_state_te_is_half_asymmetry() {
        let path = PathModel::symmetric(1_000.0).with_asymmetry(200.0);
        let mut flow = PtpFlow::new(PtpProfileConfig::default(), path, 9, 0);
        let mut slave = PtpSlave::new(clock(0.0), Servo::new(ServoConfig::default()));
        flow.advance(30 * NS_PER_S, &mut slave);
        assert!((slave.time_error_ns(30 * NS_PER_S) - 100.0).abs() < 1e-6);
    }

    #[test]
    fn halted_flow_enters_holdover() {
        let mut flow = PtpFlow::new(
            PtpProfileConfig::default(),
            Topology::C1.default_path(),
            9,
            0,
        );
        let mut slave = PtpSlave::new(clock(0.0), Servo::new(ServoConfig::default()));
        flow.advance(5 * NS_PER_S, &mut slave);
        assert_eq!(slave.sync_state(), SyncState::Locked);
        flow.stop();
        assert_eq!(flow.next_event_time(), None);
        assert_eq!(slave.servo.tick(7 * NS_PER_S), SyncState::Holdover);
    }
}
