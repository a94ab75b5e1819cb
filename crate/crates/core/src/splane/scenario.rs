//! Functional and performance procedures for the synchronization plane.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ptp::{PathModel, PtpFlow, PtpProfileConfig, PtpSlave, PtpStats, Topology};
use super::servo::SyncState;
use crate::mplane::MplaneError;
use crate::sim::{Nanos, NS_PER_MS, NS_PER_S};

/// What a sync procedure needs from its environment. The sync state must
/// come from the device's management interface, not from simulator
/// internals.
pub trait SyncTestbed {
    fn now(&self) -> Nanos;
    fn start_ptp(&mut self, profile: PtpProfileConfig, path: PathModel) -> Result<(), MplaneError>;
    fn advance_to(&mut self, t: Nanos);
    fn query_sync_state(&mut self) -> Result<SyncState, MplaneError>;
    fn ptp_stats(&self) -> Option<PtpStats>;
    /// Raw time error at the RF boundary at the current instant.
    fn time_error_ns(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SyncVerdict {
    Pass,
    Fail,
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConfig {
    pub convergence_budget_ns: Nanos,
    pub poll_interval_ns: Nanos,
    /// Window over which message rates are measured.
    pub observe_ns: Nanos,
    /// Relative rate tolerance.
    pub rate_tolerance: f64,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self {
            convergence_budget_ns: 60 * NS_PER_S,
            poll_interval_ns: 500 * NS_PER_MS,
            observe_ns: 10 * NS_PER_S,
            rate_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalOutcome {
    pub topology: Topology,
    pub verdict: SyncVerdict,
    /// Time from flow start until the device first reported LOCKED.
    pub lock_time_ns: Option<Nanos>,
    pub announce_rate_hz: f64,
    pub sync_rate_hz: f64,
    pub delay_req_rate_hz: f64,
    pub violations: Vec<String>,
}

fn rate_ok(observed: f64, required: u32, tol: f64) -> bool {
    (observed - required as f64).abs() <= tol * required as f64
}

/// Starts the flow, polls the device's reported sync state until LOCKED
/// or the budget runs out, then checks observed message rates.
pub fn run_functional_test(
    tb: &mut dyn SyncTestbed,
    topology: Topology,
    profile: PtpProfileConfig,
    path: PathModel,
    cfg: &FunctionalConfig,
) -> FunctionalOutcome {
    let mut out = FunctionalOutcome {
        topology,
        verdict: SyncVerdict::Blocked,
        lock_time_ns: None,
        announce_rate_hz: 0.0,
        sync_rate_hz: 0.0,
        delay_req_rate_hz: 0.0,
        violations: Vec::new(),
    };
    if let Err(e) = tb.start_ptp(profile, path) {
        out.violations
            .push(format!("management plane unavailable: {e}"));
        return out;
    }
    let start = tb.now();
    let deadline = start + cfg.convergence_budget_ns;
    let mut t = start;
    while t < deadline {
        t = (t + cfg.poll_interval_ns).min(deadline);
        tb.advance_to(t);
        match tb.query_sync_state() {
            Ok(SyncState::Locked) => {
                out.lock_time_ns = Some(t - start);
                break;
            }
            Ok(_) => {}
            Err(e) => {
                out.violations
                    .push(format!("management plane unavailable: {e}"));
                return out;
            }
        }
    }
    if tb.now() < start + cfg.observe_ns {
        tb.advance_to(start + cfg.observe_ns);
    }
    let required = PtpProfileConfig::default();
    out.violations.extend(profile.violations());
    if let Some(stats) = tb.ptp_stats() {
        out.announce_rate_hz = stats.rate_hz(stats.announces);
        out.sync_rate_hz = stats.rate_hz(stats.syncs);
        out.delay_req_rate_hz = stats.rate_hz(stats.delay_reqs);
        for (name, got, want) in [
            ("announce", out.announce_rate_hz, required.announce_rate_hz),
            ("sync", out.sync_rate_hz, required.sync_rate_hz),
            (
                "delay_req",
                out.delay_req_rate_hz,
                required.delay_req_rate_hz,
            ),
        ] {
            if !rate_ok(got, want, cfg.rate_tolerance) {
                out.violations.push(format!(
                    "observed {name} rate {got:.2} Hz, profile requires {want} Hz"
                ));
            }
        }
    }
    if out.lock_time_ns.is_none() {
        out.violations.push(format!(
            "not LOCKED within {} s",
            cfg.convergence_budget_ns / NS_PER_S
        ));
    }
    out.verdict = if out.violations.is_empty() {
        SyncVerdict::Pass
    } else {
        SyncVerdict::Fail
    };
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeSample {
    pub t_ns: Nanos,
    pub te_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeErrorSeries {
    /// Raw samples, before calibration.
    pub samples: Vec<TeSample>,
    pub calibration_offset_ns: f64,
}

impl TimeErrorSeries {
    pub fn reported(&self) -> impl Iterator<Item = TeSample> + '_ {
        self.samples.iter().map(|s| TeSample {
            t_ns: s.t_ns,
            te_ns: s.te_ns - self.calibration_offset_ns,
        })
    }

    /// max|TE| after calibration; 0 for an empty series.
    pub fn max_abs_te(&self) -> f64 {
        self.reported().map(|s| s.te_ns.abs()).fold(0.0, f64::max)
    }

    /// Calibrated series as `t_ns te_ns` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# t_ns te_ns\n");
        for p in self.reported() {
            let _ = writeln!(s, "{} {:.3}", p.t_ns, p.te_ns);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceConfig {
    pub lock_budget_ns: Nanos,
    pub settle_ns: Nanos,
    pub duration_ns: Nanos,
    pub sample_interval_ns: Nanos,
    pub te_limit_ns: f64,
}

impl Default for PerformanceConfig {
    fn default() -> Self {
        Self {
            lock_budget_ns: 60 * NS_PER_S,
            settle_ns: 30 * NS_PER_S,
            duration_ns: 60 * NS_PER_S,
            // Off the exchange grid so samples never coincide with a
            // servo correction.
            sample_interval_ns: 250 * NS_PER_MS,
            te_limit_ns: 1_500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceOutcome {
    pub topology: Topology,
    pub verdict: SyncVerdict,
    pub max_te_ns: f64,
    pub series: TimeErrorSeries,
    pub note: String,
}

/// Waits for LOCKED, lets the servo settle, then samples time error over
/// the measurement window.
pub fn run_performance_test(
    tb: &mut dyn SyncTestbed,
    topology: Topology,
    calibration_offset_ns: f64,
    profile: PtpProfileConfig,
    path: PathModel,
    cfg: &PerformanceConfig,
) -> PerformanceOutcome {
    let mut out = PerformanceOutcome {
        topology,
        verdict: SyncVerdict::Blocked,
        max_te_ns: 0.0,
        series: TimeErrorSeries {
            samples: Vec::new(),
            calibration_offset_ns,
        },
        note: String::new(),
    };
    if let Err(e) = tb.start_ptp(profile, path) {
        out.note = format!("management plane unavailable: {e}");
        return out;
    }
    let start = tb.now();
    let mut t = start;
    let mut locked = false;
    while t < start + cfg.lock_budget_ns {
        t += NS_PER_S;
        tb.advance_to(t);
        match tb.query_sync_state() {
            Ok(SyncState::Locked) => {
                locked = true;
                break;
            }
            Ok(_) => {}
            Err(e) => {
                out.note = format!("management plane unavailable: {e}");
                return out;
            }
        }
    }
    if !locked {
        out.note = "never reached LOCKED".into();
        return out;
    }
    let begin = t + cfg.settle_ns;
    let mut s = begin;
    // The first sample sits mid-way between exchanges.
    s += 31 * NS_PER_MS;
    while s <= begin + cfg.duration_ns {
        tb.advance_to(s);
        out.series.samples.push(TeSample {
            t_ns: s,
            te_ns: tb.time_error_ns(),
        });
        s += cfg.sample_interval_ns;
    }
    out.max_te_ns = out.series.max_abs_te();
    out.verdict = if out.max_te_ns <= cfg.te_limit_ns {
        SyncVerdict::Pass
    } else {
        SyncVerdict::Fail
    };
    out.note = format!(
        "max|TE| {:.1} ns after {:.1} ns calibration, limit {:.0} ns",
        out.max_te_ns, calibration_offset_ns, cfg.te_limit_ns
    );
    out
}

/// Standalone link between a grandmaster and one slave, reporting the
/// servo state directly. Used where no device emulator is involved.
pub struct PtpLinkBed {
    pub slave: PtpSlave,
    pub flow: Option<PtpFlow>,
    pub seed: u64,
    now: Nanos,
}

impl PtpLinkBed {
    pub fn new(slave: PtpSlave, seed: u64) -> Self {
        Self {
            slave,
            flow: None,
            seed,
            now: 0,
        }
    }
}

impl SyncTestbed for PtpLinkBed {
    fn now(&self) -> Nanos {
        self.now
    }

    fn start_ptp(&mut self, profile: PtpProfileConfig, path: PathModel) -> Result<(), MplaneError> {
        self.flow = Some(PtpFlow::new(profile, path, self.seed, self.now));
        Ok(())
    }

    fn advance_to(&mut self, t: Nanos) {
        if let Some(f) = &mut self.flow {
            f.advance(t, &mut self.slave);
        }
        self.slave.servo.tick(t);
        self.now = self.now.max(t);
    }

    fn query_sync_state(&mut self) -> Result<SyncState, MplaneError> {
        Ok(self.slave.sync_state())
    }

    fn ptp_stats(&self) -> Option<PtpStats> {
        self.flow.as_ref().map(|f| f.stats())
    }

    fn time_error_ns(&self) -> f64 {
        self.slave.time_error_ns(self.now)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splane::clock::{SimClock, SimClockConfig};
    use crate::splane::servo::{Servo, ServoConfig};

    fn bed(noise: f64) -> PtpLinkBed {
        let clock = SimClock::new(SimClockConfig {
            noise_std_ns: noise,
            rng_seed: 11,
            ..Default::default()
        });
        PtpLinkBed::new(PtpSlave::new(clock, Servo::new(ServoConfig::default())), 5)
    }

    #[test]
    fn functional_passes_on_every_topology() {
        for topo in Topology::ALL {
            let out = run_functional_test(
                &mut bed(1.0),
                topo,
                PtpProfileConfig::default(),
                topo.default_path(),
                &FunctionalConfig::default(),
            );
            assert_eq!(
                out.verdict,
                SyncVerdict::Pass,
                "{topo:?}: {:?}",
                out.violations
            );
            assert!(out.lock_time_ns.unwrap() <= 10 * NS_PER_S);
        }
    }

    #[test]
    fn slow_announce_fails() {
        let profile = PtpProfileConfig {
            announce_rate_hz: 1,
            ..Default::default()
        };
        let out = run_functional_test(
            &mut bed(1.0),
            Topology::C1,
            profile,
            Topology::C1.default_path(),
            &FunctionalConfig::default(),
        );
        assert_eq!(out.verdict, SyncVerdict::Fail);
        assert!(out.violations.iter().any(|v| v.contains("announce")));
    }

    #[test]
    fn performance_zero_asymmetry() {
        let out = run_performance_test(
            &mut bed(0.0),
            Topology::C1,
            0.0,
            PtpProfileConfig::default(),
            Topology::C1.default_path(),
            &PerformanceConfig::default(),
        );
        assert_eq!(out.verdict, SyncVerdict::Pass);
        assert!(out.max_te_ns < 10.0, "{}", out.max_te_ns);
        assert_eq!(out.series.samples.len(), 240);
    }

    #[test]
    fn calibration_is_translation() {
        let path = Topology::C1.default_path().with_asymmetry(200.0);
        let run = |cal| {
            run_performance_test(
                &mut bed(1.0),
                Topology::C1,
                cal,
                PtpProfileConfig::default(),
                path.clone(),
                &PerformanceConfig::default(),
            )
        };
        let raw = run(0.0);
        let cal = run(100.0);
        assert!((raw.max_te_ns - 100.0).abs() <= 5.0, "{}", raw.max_te_ns);
        assert!(cal.max_te_ns <= 5.0, "{}", cal.max_te_ns);
        for (a, b) in raw.series.reported().zip(cal.series.reported()) {
            assert!((a.te_ns - 100.0 - b.te_ns).abs() < 1e-9);
        }
        let text = cal.series.to_text();
        assert!(text.starts_with("# t_ns te_ns\n"));
        assert_eq!(text.lines().count(), cal.series.samples.len() + 1);
    }
}
