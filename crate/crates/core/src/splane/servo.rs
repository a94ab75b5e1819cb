//! Proportional-integral clock servo and lock-state machine.

use serde::{Deserialize, Serialize};

use super::clock::SimClock;
use crate::sim::{Nanos, NS_PER_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SyncState {
    Freerun,
    Holdover,
    Locked,
}

impl SyncState {
    pub fn as_str(self) -> &'static str {
        match self {
            SyncState::Freerun => "FREERUN",
            SyncState::Holdover => "HOLDOVER",
            SyncState::Locked => "LOCKED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "FREERUN" => Some(SyncState::Freerun),
            "HOLDOVER" => Some(SyncState::Holdover),
            "LOCKED" => Some(SyncState::Locked),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoConfig {
    pub kp: f64,
    pub ki: f64,
    pub lock_threshold_ns: f64,
    /// Consecutive exchanges on one side of the threshold needed to lock
    /// or unlock.
    pub hold_count: u32,
    /// Silence after which a locked servo enters holdover.
    pub holdover_timeout_ns: Nanos,
    /// Offsets beyond this are removed with a single phase step.
    pub step_threshold_ns: f64,
}

impl Default for ServoConfig {
    fn default() -> Self {
        Self {
            kp: 0.1,
            ki: 0.01,
            lock_threshold_ns: 100.0,
            hold_count: 8,
            holdover_timeout_ns: NS_PER_S,
            step_threshold_ns: 1_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Servo {
    pub config: ServoConfig,
    pub sync_state: SyncState,
    pub estimated_offset_ns: f64,
    pub estimated_freq_ppb: f64,
    pub integrator: f64,
    good_streak: u32,
    bad_streak: u32,
    last_update: Option<Nanos>,
    exchanges: u64,
}

impl Servo {
    pub fn new(config: ServoConfig) -> Self {
        Self {
            config,
            sync_state: SyncState::Freerun,
            estimated_offset_ns: 0.0,
            estimated_freq_ppb: 0.0,
            integrator: 0.0,
            good_streak: 0,
            bad_streak: 0,
            last_update: None,
            exchanges: 0,
        }
    }

    pub fn exchanges(&self) -> u64 {
        self.exchanges
    }

    /// Applies one offset estimate taken `interval_s` after the previous
    /// one. Returns the new sync state.
    pub fn update(
        &mut self,
        now: Nanos,
        offset_est_ns: f64,
        interval_s: f64,
        clock: &mut SimClock,
    ) -> SyncState {
        let c = self.config;
        self.exchanges += 1;
        self.last_update = Some(now);
        self.estimated_offset_ns = offset_est_ns;

        if offset_est_ns.abs() > c.step_threshold_ns {
            clock.step_phase(-offset_est_ns);
        } else {
            self.integrator += offset_est_ns;
            clock.step_phase(-c.kp * offset_est_ns);
        }
        // Absolute frequency correction from the integral term.
        let correction_ppb = -c.ki * self.integrator / interval_s;
        let base = clock.freq_ppb() + self.estimated_freq_ppb;
        self.estimated_freq_ppb = -correction_ppb;
        clock.set_frequency(now, base + correction_ppb);

        if offset_est_ns.abs() < c.lock_threshold_ns {
            self.good_streak += 1;
            self.bad_streak = 0;
        } else {
            self.bad_streak += 1;
            self.good_streak = 0;
        }
        self.sync_state = match self.sync_state {
            SyncState::Locked if self.bad_streak >= c.hold_count => SyncState::Freerun,
            SyncState::Locked => SyncState::Locked,
            _ if self.good_streak >= c.hold_count => SyncState::Locked,
            s => s,
        };
        self.sync_state
    }

    /// Instant at which a locked servo enters holdover absent further
    /// exchanges.
    pub fn holdover_deadline(&self) -> Option<Nanos> {
        (self.sync_state == SyncState::Locked)
            .then(|| self.last_update.unwrap_or(0) + self.config.holdover_timeout_ns)
    }

    /// Time-driven transitions: a locked servo without exchanges for the
    /// holdover timeout enters holdover.
    pub fn tick(&mut self, now: Nanos) -> SyncState {
        if self.sync_state == SyncState::Locked {
            let silent_since = self.last_update.unwrap_or(0);
            if now.saturating_sub(silent_since) >= self.config.holdover_timeout_ns {
                self.sync_state = SyncState::Holdover;
                self.good_streak = 0;
            }
        }
        self.sync_state
    }
}
