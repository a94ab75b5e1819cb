//! Simulated local oscillator.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::sim::{seeded_rng, Nanos};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClockConfig {
    pub phase_offset_ns: f64,
    pub freq_offset_ppb: f64,
    /// Standard deviation of timestamping noise.
    pub noise_std_ns: f64,
    pub rng_seed: u64,
}

impl Default for SimClockConfig {
    fn default() -> Self {
        Self {
            phase_offset_ns: 1_000.0,
            freq_offset_ppb: 50.0,
            noise_std_ns: 1.0,
            rng_seed: 0,
        }
    }
}

/// `read(t) = t + phase + freq_ppb * (t - anchor) * 1e-9 + noise`.
///
/// Phase is kept relative to an anchor so frequency changes do not move
/// the clock discontinuously.
#[derive(Debug, Clone)]
pub struct SimClock {
    anchor_ns: Nanos,
    phase_ns: f64,
    freq_ppb: f64,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
}

impl SimClock {
    pub fn new(cfg: SimClockConfig) -> Self {
        assert!(cfg.noise_std_ns >= 0.0, "noise std must be non-negative");
        Self {
            anchor_ns: 0,
            phase_ns: cfg.phase_offset_ns,
            freq_ppb: cfg.freq_offset_ppb,
            noise: (cfg.noise_std_ns > 0.0)
                .then(|| Normal::new(0.0, cfg.noise_std_ns).expect("finite std")),
            rng: seeded_rng(cfg.rng_seed, "sim-clock"),
        }
    }

    /// A perfect reference clock.
    pub fn ideal() -> Self {
        Self::new(SimClockConfig {
            phase_offset_ns: 0.0,
            freq_offset_ppb: 0.0,
            noise_std_ns: 0.0,
            rng_seed: 0,
        })
    }

    /// Clock offset from true time at `t`, without noise.
    pub fn offset_at(&self, t: Nanos) -> f64 {
        self.phase_ns + self.freq_ppb * (t as f64 - self.anchor_ns as f64) * 1e-9
    }

    pub fn read_exact(&self, t: Nanos) -> f64 {
        t as f64 + self.offset_at(t)
    }

    /// Timestamp taken at true time `t`.
    pub fn read(&mut self, t: Nanos) -> f64 {
        let n = match &self.noise {
            Some(d) => d.sample(&mut self.rng),
            None => 0.0,
        };
        self.read_exact(t) + n
    }

    pub fn freq_ppb(&self) -> f64 {
        self.freq_ppb
    }

    pub fn step_phase(&mut self, delta_ns: f64) {
        self.phase_ns += delta_ns;
    }

    pub fn set_frequency(&mut self, now: Nanos, freq_ppb: f64) {
        self.phase_ns = self.offset_at(now);
        self.anchor_ns = now;
        self.freq_ppb = freq_ppb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::NS_PER_S;

    #[test]
    fn linear_model() {
        let c = SimClock::new(SimClockConfig {
            phase_offset_ns: 100.0,
            freq_offset_ppb: 1_000.0,
            noise_std_ns: 0.0,
            rng_seed: 1,
        });
        assert_eq!(c.read_exact(0), 100.0);
        assert_eq!(c.offset_at(NS_PER_S), 1_100.0);
    }

    #[test]
    fn frequency_change_is_continuous() {
        let mut c = SimClock::new(SimClockConfig {
            phase_offset_ns: 0.0,
            freq_offset_ppb: 100.0,
            noise_std_ns: 0.0,
            rng_seed: 1,
        });
        let before = c.offset_at(NS_PER_S);
        c.set_frequency(NS_PER_S, -100.0);
        assert_eq!(c.offset_at(NS_PER_S), before);
        assert!((c.offset_at(2 * NS_PER_S) - 0.0).abs() < 1e-9);
    }

    #[test]
    fn noise_is_seeded() {
        let cfg = SimClockConfig {
            noise_std_ns: 5.0,
            ..Default::default()
        };
        let mut a = SimClock::new(cfg);
        let mut b = SimClock::new(cfg);
        for t in 0..10 {
            assert_eq!(a.read(t), b.read(t));
        }
    }
}
