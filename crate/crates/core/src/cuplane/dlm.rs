//! Delay management: reception windows and arrival classification.
//!
//! An arrival is measured as its advance before the over-the-air time of
//! the symbol it describes. Windows are closed intervals on that advance.

use serde::{Deserialize, Serialize};

use super::error::CuError;
use crate::sim::NS_PER_US;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    Control,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayWindow {
    pub t2a_min_up_ns: i64,
    pub t2a_max_up_ns: i64,
    pub t2a_min_cp_ns: i64,
    pub t2a_max_cp_ns: i64,
}

impl Default for DelayWindow {
    fn default() -> Self {
        let us = NS_PER_US as i64;
        Self {
            t2a_min_up_ns: 25 * us,
            t2a_max_up_ns: 140 * us,
            t2a_min_cp_ns: 125 * us,
            t2a_max_cp_ns: 336 * us,
        }
    }
}

impl DelayWindow {
    pub fn validate(&self) -> Result<(), CuError> {
        if self.t2a_min_up_ns >= self.t2a_max_up_ns {
            return Err(CuError::InvalidWindow(
                "U-Plane min must be below max".into(),
            ));
        }
        if self.t2a_min_cp_ns >= self.t2a_max_cp_ns {
            return Err(CuError::InvalidWindow(
                "C-Plane min must be below max".into(),
            ));
        }
        Ok(())
    }

    pub fn bounds(&self, plane: Plane) -> (i64, i64) {
        match plane {
            Plane::Control => (self.t2a_min_cp_ns, self.t2a_max_cp_ns),
            Plane::User => (self.t2a_min_up_ns, self.t2a_max_up_ns),
        }
    }

    pub fn midpoint(&self, plane: Plane) -> i64 {
        let (lo, hi) = self.bounds(plane);
        lo + (hi - lo) / 2
    }

    pub fn classify(&self, plane: Plane, advance_ns: i64) -> Arrival {
        let (lo, hi) = self.bounds(plane);
        if advance_ns > hi {
            Arrival::Early
        } else if advance_ns < lo {
            Arrival::Late
        } else {
            Arrival::OnTime
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arrival {
    OnTime,
    Early,
    Late,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub received: u64,
    pub dropped_early: u64,
    pub dropped_late: u64,
}

impl Counters {
    pub fn total(&self) -> u64 {
        self.received + self.dropped_early + self.dropped_late
    }

    pub fn record(&mut self, a: Arrival) {
        match a {
            Arrival::OnTime => self.received += 1,
            Arrival::Early => self.dropped_early += 1,
            Arrival::Late => self.dropped_late += 1,
        }
    }
}

/// Analyzer-side expectation for a list of arrival advances.
pub fn evaluate_dlm(window: &DelayWindow, plane: Plane, advances_ns: &[i64]) -> Counters {
    let mut c = Counters::default();
    for a in advances_ns {
        c.record(window.classify(plane, *a));
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DlmStimulus {
    /// Spread across the window, both boundaries included.
    InWindow,
    /// Every message arrives after the window closes.
    Late,
    /// Every message arrives before the window opens.
    Early,
}

/// Arrival advances for `count` messages (`count >= 2` for `InWindow` to
/// hit both boundaries).
pub fn dlm_advances(
    window: &DelayWindow,
    plane: Plane,
    stimulus: DlmStimulus,
    count: usize,
) -> Vec<i64> {
    let (lo, hi) = window.bounds(plane);
    let step = 1_000;
    match stimulus {
        DlmStimulus::InWindow if count > 1 => (0..count)
            .map(|i| lo + (hi - lo) * i as i64 / (count as i64 - 1))
            .collect(),
        DlmStimulus::InWindow => vec![window.midpoint(plane); count],
        DlmStimulus::Late => (0..count).map(|i| lo - step * (1 + i as i64)).collect(),
        DlmStimulus::Early => (0..count).map(|i| hi + step * (1 + i as i64)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries_accepted() {
        let w = DelayWindow::default();
        assert_eq!(w.classify(Plane::User, 25_000), Arrival::OnTime);
        assert_eq!(w.classify(Plane::User, 140_000), Arrival::OnTime);
        assert_eq!(w.classify(Plane::User, 24_999), Arrival::Late);
        assert_eq!(w.classify(Plane::User, 140_001), Arrival::Early);
        assert_eq!(w.classify(Plane::Control, 336_000), Arrival::OnTime);
        assert_eq!(w.classify(Plane::Control, 124_999), Arrival::Late);
    }

    #[test]
    fn mid_window_all_received() {
        let w = DelayWindow::default();
        let c = evaluate_dlm(
            &w,
            Plane::User,
            &dlm_advances(&w, Plane::User, DlmStimulus::InWindow, 14),
        );
        assert_eq!(
            c,
            Counters {
                received: 14,
                ..Counters::default()
            }
        );
    }

    #[test]
    fn late_all_dropped() {
        let w = DelayWindow::default();
        let c = evaluate_dlm(
            &w,
            Plane::Control,
            &dlm_advances(&w, Plane::Control, DlmStimulus::Late, 5),
        );
        assert_eq!(c.dropped_late, 5);
        assert_eq!(c.received, 0);
        let c = evaluate_dlm(
            &w,
            Plane::User,
            &dlm_advances(&w, Plane::User, DlmStimulus::Early, 3),
        );
        assert_eq!(c.dropped_early, 3);
    }

    #[test]
    fn invalid_window() {
        let w = DelayWindow {
            t2a_min_up_ns: 10,
            t2a_max_up_ns: 10,
            ..DelayWindow::default()
        };
        assert!(w.validate().is_err());
    }

    proptest! {
        #[test]
        fn conservation(adv in prop::collection::vec(-1_000_000i64..1_000_000, 0..200), cp in any::<bool>()) {
            let plane = if cp { Plane::Control } else { Plane::User };
            let c = evaluate_dlm(&DelayWindow::default(), plane, &adv);
            prop_assert_eq!(c.total(), adv.len() as u64);
        }
    }
}
