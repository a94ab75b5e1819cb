//! Carrier configuration, TDD pattern, and radio frame timing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::error::CuError;
use crate::codec::{DataDirection, RadioTiming};
use crate::sim::{Nanos, NS_PER_MS};

pub const SYMBOLS_PER_SLOT: u8 = 14;
/// Radio frame numbers wrap after 256 frames of 10 subframes.
pub const FRAMES_PER_WRAP: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    Downlink,
    Uplink,
    Special,
}

/// Repeating per-slot TDD pattern such as `DDDSU`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TddPattern(Vec<SlotKind>);

impl TddPattern {
    pub fn slot(&self, abs_slot: u64) -> SlotKind {
        self.0[(abs_slot % self.0.len() as u64) as usize]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for TddPattern {
    fn default() -> Self {
        "DDDSU".parse().expect("valid default pattern")
    }
}

impl FromStr for TddPattern {
    type Err = CuError;

    fn from_str(s: &str) -> Result<Self, CuError> {
        let slots = s
            .chars()
            .map(|c| match c {
                'D' => Ok(SlotKind::Downlink),
                'U' => Ok(SlotKind::Uplink),
                'S' => Ok(SlotKind::Special),
                other => Err(CuError::InvalidCarrier(format!("TDD slot code {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if slots.is_empty() {
            return Err(CuError::InvalidCarrier("empty TDD pattern".into()));
        }
        Ok(Self(slots))
    }
}

impl fmt::Display for TddPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                SlotKind::Downlink => "D",
                SlotKind::Uplink => "U",
                SlotKind::Special => "S",
            })?;
        }
        Ok(())
    }
}

impl TryFrom<String> for TddPattern {
    type Error = CuError;

    fn try_from(s: String) -> Result<Self, CuError> {
        s.parse()
    }
}

impl From<TddPattern> for String {
    fn from(p: TddPattern) -> String {
        p.to_string()
    }
}

/// Special slots carry downlink symbols first, then a guard, then uplink.
pub const SPECIAL_DL_SYMBOLS: u8 = 10;
pub const SPECIAL_GUARD_SYMBOLS: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierConfig {
    pub band: String,
    pub bandwidth_mhz: u32,
    pub numerology: u8,
    pub scs_khz: u32,
    pub n_prb: u16,
    pub center_frequency_khz: u32,
    pub tdd: TddPattern,
    pub ru_ports: usize,
    pub iq_bitwidth: u8,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        Self {
            band: "n77".into(),
            bandwidth_mhz: 50,
            numerology: 1,
            scs_khz: 30,
            n_prb: 133,
            center_frequency_khz: 3_700_000,
            tdd: TddPattern::default(),
            ru_ports: 32,
            iq_bitwidth: 9,
        }
    }
}

impl CarrierConfig {
    pub fn validate(&self) -> Result<(), CuError> {
        if self.numerology > 4 {
            return Err(CuError::InvalidCarrier(format!(
                "numerology {}",
                self.numerology
            )));
        }
        if self.scs_khz != 15 << self.numerology {
            return Err(CuError::InvalidCarrier(format!(
                "scs {} kHz does not match numerology {}",
                self.scs_khz, self.numerology
            )));
        }
        if self.n_prb == 0 || self.n_prb > 275 {
            return Err(CuError::InvalidCarrier(format!("n_prb {}", self.n_prb)));
        }
        if self.iq_bitwidth != 9 {
            return Err(CuError::InvalidCarrier(format!(
                "iq bitwidth {} (only static 9-bit BFP is supported)",
                self.iq_bitwidth
            )));
        }
        if self.ru_ports == 0 {
            return Err(CuError::InvalidCarrier("no RU ports".into()));
        }
        Ok(())
    }

    pub fn slots_per_subframe(&self) -> u64 {
        1 << self.numerology
    }

    pub fn slot_duration_ns(&self) -> Nanos {
        NS_PER_MS / self.slots_per_subframe()
    }

    pub fn slot_start_ns(&self, abs_slot: u64) -> Nanos {
        abs_slot * self.slot_duration_ns()
    }

    /// Over-the-air start of a symbol; symbols split the slot evenly.
    pub fn ota_time_ns(&self, abs_slot: u64, symbol: u8) -> Nanos {
        self.slot_start_ns(abs_slot)
            + symbol as u64 * self.slot_duration_ns() / SYMBOLS_PER_SLOT as u64
    }

    pub fn symbol_direction(&self, abs_slot: u64, symbol: u8) -> Option<DataDirection> {
        match self.tdd.slot(abs_slot) {
            SlotKind::Downlink => Some(DataDirection::Downlink),
            SlotKind::Uplink => Some(DataDirection::Uplink),
            SlotKind::Special if symbol < SPECIAL_DL_SYMBOLS => Some(DataDirection::Downlink),
            SlotKind::Special if symbol < SPECIAL_DL_SYMBOLS + SPECIAL_GUARD_SYMBOLS => None,
            SlotKind::Special => Some(DataDirection::Uplink),
        }
    }

    /// True when every symbol in `[start, start + count)` has direction `dir`.
    pub fn symbols_allow(&self, abs_slot: u64, start: u8, count: u8, dir: DataDirection) -> bool {
        count > 0
            && start as u16 + count as u16 <= SYMBOLS_PER_SLOT as u16
            && (start..start + count).all(|s| self.symbol_direction(abs_slot, s) == Some(dir))
    }

    /// First slot at or after `from` whose kind is `kind`.
    pub fn next_slot_of(&self, from: u64, kind: SlotKind) -> u64 {
        (from..from + self.tdd.len() as u64)
            .find(|s| self.tdd.slot(*s) == kind)
            .unwrap_or(from)
    }

    pub fn timing(&self, abs_slot: u64, symbol: u8) -> RadioTiming {
        let spf = self.slots_per_subframe();
        RadioTiming {
            frame_id: ((abs_slot / (10 * spf)) % FRAMES_PER_WRAP) as u8,
            subframe_id: ((abs_slot / spf) % 10) as u8,
            slot_id: (abs_slot % spf) as u8,
            symbol_id: symbol,
        }
    }

    fn wrap_slots(&self) -> u64 {
        FRAMES_PER_WRAP * 10 * self.slots_per_subframe()
    }

    /// Absolute slot for wrapped radio timing, choosing the candidate
    /// nearest to `near_slot`.
    pub fn resolve_slot(&self, timing: &RadioTiming, near_slot: u64) -> u64 {
        let spf = self.slots_per_subframe();
        let rel =
            (timing.frame_id as u64 * 10 + timing.subframe_id as u64) * spf + timing.slot_id as u64;
        let wrap = self.wrap_slots();
        let base = near_slot - near_slot % wrap;
        [base.checked_sub(wrap), Some(base), Some(base + wrap)]
            .into_iter()
            .flatten()
            .map(|b| b + rel)
            .min_by_key(|c| c.abs_diff(near_slot))
            .expect("at least one candidate")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_n77_50mhz_mu1() {
        let c = CarrierConfig::default();
        c.validate().unwrap();
        assert_eq!(c.slots_per_subframe(), 2);
        assert_eq!(c.slot_duration_ns(), 500_000);
        assert_eq!(c.tdd.to_string(), "DDDSU");
        let bad = CarrierConfig {
            scs_khz: 15,
            ..CarrierConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tdd_directions() {
        let c = CarrierConfig::default();
        assert_eq!(c.symbol_direction(0, 13), Some(DataDirection::Downlink));
        assert_eq!(c.symbol_direction(3, 9), Some(DataDirection::Downlink));
        assert_eq!(c.symbol_direction(3, 10), None);
        assert_eq!(c.symbol_direction(3, 12), Some(DataDirection::Uplink));
        assert_eq!(c.symbol_direction(4, 0), Some(DataDirection::Uplink));
        assert!(c.symbols_allow(4, 0, 14, DataDirection::Uplink));
        assert!(!c.symbols_allow(3, 0, 14, DataDirection::Downlink));
        assert_eq!(c.next_slot_of(5, SlotKind::Uplink), 9);
    }

    #[test]
    fn timing_round_trip_across_wrap() {
        let c = CarrierConfig::default();
        for slot in [0u64, 1, 19, 20, 5119, 5120, 5121, 123_456] {
            let t = c.timing(slot, 3);
            assert_eq!(c.resolve_slot(&t, slot), slot);
            assert_eq!(c.resolve_slot(&t, slot + 100), slot);
            assert_eq!(c.resolve_slot(&t, slot.saturating_sub(100)), slot);
        }
        let t = c.timing(21, 0);
        assert_eq!((t.frame_id, t.subframe_id, t.slot_id), (1, 0, 1));
    }

    #[test]
    fn ota_times() {
        let c = CarrierConfig::default();
        assert_eq!(c.ota_time_ns(2, 0), 1_000_000);
        assert_eq!(c.ota_time_ns(0, 7), 250_000);
        assert_eq!(c.ota_time_ns(0, 1), 35_714);
    }
}
