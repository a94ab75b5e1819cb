//! PN23-seeded resource grids standing in for the 3GPP test models.
//!
//! Constellations use the Gray maps of TS 38.211: bit pairs (b0, b1) pick
//! the sign of I and Q, and higher orders nest amplitude bits inside.
//! Symbols have unit average power before scaling to the RMS target.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::carrier::{CarrierConfig, SYMBOLS_PER_SLOT};
use super::error::CuError;
use super::pn23::Pn23;
use crate::codec::{Iq, RES_PER_PRB};

/// Default per-RE RMS amplitude in 16-bit units (about -12 dBFS).
pub const DEFAULT_RMS: f64 = 8192.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modulation {
    Qpsk,
    Qam64,
    Qam256,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }

    /// Map `bits_per_symbol` bits (each 0 or 1) to a unit-power point.
    pub fn map(self, bits: &[u8]) -> Complex<f64> {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        let s = |b: u8| 1.0 - 2.0 * b as f64;
        match self {
            Modulation::Qpsk => Complex::new(s(bits[0]), s(bits[1])) / 2f64.sqrt(),
            Modulation::Qam64 => {
                let i = s(bits[0]) * (4.0 - s(bits[2]) * (2.0 - s(bits[4])));
                let q = s(bits[1]) * (4.0 - s(bits[3]) * (2.0 - s(bits[5])));
                Complex::new(i, q) / 42f64.sqrt()
            }
            Modulation::Qam256 => {
                let i = s(bits[0]) * (8.0 - s(bits[2]) * (4.0 - s(bits[4]) * (2.0 - s(bits[6]))));
                let q = s(bits[1]) * (8.0 - s(bits[3]) * (4.0 - s(bits[5]) * (2.0 - s(bits[7]))));
                Complex::new(i, q) / 170f64.sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub model_tag: String,
    pub modulation: Modulation,
    pub pn23_seed: u32,
}

impl WaveformSpec {
    pub fn downlink() -> Self {
        Self {
            model_tag: "NR-RF1-TM1.1".into(),
            modulation: Modulation::Qpsk,
            pn23_seed: 0x7F_FFFF,
        }
    }

    pub fn uplink() -> Self {
        Self {
            model_tag: "G-FR1-A-5".into(),
            modulation: Modulation::Qam64,
            pn23_seed: 0x2A_5A5A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub start_prb: u16,
    pub num_prb: u16,
    pub start_symbol: u8,
    pub num_symbols: u8,
    /// The rb flag: the section covers every other PRB from `start_prb`.
    #[serde(default)]
    pub every_other_rb: bool,
}

/// PRB numbers a section covers.
pub fn section_prbs(
    start_prb: u16,
    num_prb: usize,
    every_other_rb: bool,
) -> impl Iterator<Item = usize> {
    let stride = if every_other_rb { 2 } else { 1 };
    (0..num_prb).map(move |k| start_prb as usize + k * stride)
}

impl Allocation {
    pub fn full(carrier: &CarrierConfig) -> Self {
        Self {
            start_prb: 0,
            num_prb: carrier.n_prb,
            start_symbol: 0,
            num_symbols: SYMBOLS_PER_SLOT,
            every_other_rb: false,
        }
    }

    /// One past the highest PRB covered.
    pub fn prb_end(&self) -> u32 {
        match self.num_prb {
            0 => self.start_prb as u32,
            n if self.every_other_rb => self.start_prb as u32 + 2 * (n as u32 - 1) + 1,
            n => self.start_prb as u32 + n as u32,
        }
    }

    pub fn prbs(&self) -> impl Iterator<Item = usize> {
        section_prbs(self.start_prb, self.num_prb as usize, self.every_other_rb)
    }

    pub fn validate(&self, n_prb: u16) -> Result<(), CuError> {
        if self.prb_end() > n_prb as u32 {
            return Err(CuError::AllocationOutOfRange(format!(
                "PRBs {}..{} exceed carrier of {n_prb}",
                self.start_prb,
                self.prb_end()
            )));
        }
        if self.start_symbol as u16 + self.num_symbols as u16 > SYMBOLS_PER_SLOT as u16 {
            return Err(CuError::AllocationOutOfRange(format!(
                "symbols {}..{} exceed the slot",
                self.start_symbol,
                self.start_symbol as u16 + self.num_symbols as u16
            )));
        }
        Ok(())
    }

    pub fn symbols(&self) -> std::ops::Range<u8> {
        self.start_symbol..self.start_symbol + self.num_symbols
    }

    pub fn is_empty(&self) -> bool {
        self.num_prb == 0 || self.num_symbols == 0
    }
}

/// One slot of samples for a single stream, `[symbol][re]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceGrid {
    pub n_prb: u16,
    pub samples: Vec<Vec<Iq>>,
}

impl ResourceGrid {
    pub fn zeros(n_prb: u16) -> Self {
        Self {
            n_prb,
            samples: vec![
                vec![Iq::new(0, 0); n_prb as usize * RES_PER_PRB];
                SYMBOLS_PER_SLOT as usize
            ],
        }
    }

    pub fn symbol(&self, symbol: u8) -> &[Iq] {
        &self.samples[symbol as usize]
    }

    /// REs of PRBs `[start_prb, start_prb + num_prb)` in one symbol.
    pub fn prb_span(&self, symbol: u8, start_prb: u16, num_prb: u16) -> &[Iq] {
        let a = start_prb as usize * RES_PER_PRB;
        &self.samples[symbol as usize][a..a + num_prb as usize * RES_PER_PRB]
    }

    /// REs of the PRBs a section covers, in section order.
    pub fn gather(
        &self,
        symbol: u8,
        start_prb: u16,
        num_prb: usize,
        every_other_rb: bool,
    ) -> Vec<Iq> {
        let row = &self.samples[symbol as usize];
        section_prbs(start_prb, num_prb, every_other_rb)
            .flat_map(|p| row[p * RES_PER_PRB..(p + 1) * RES_PER_PRB].iter().copied())
            .collect()
    }

    /// Inverse of [`gather`](Self::gather). REs beyond the carrier are dropped.
    pub fn scatter(&mut self, symbol: u8, start_prb: u16, every_other_rb: bool, res: &[Iq]) {
        let row = &mut self.samples[symbol as usize];
        let prbs = section_prbs(start_prb, res.len().div_ceil(RES_PER_PRB), every_other_rb);
        for (p, chunk) in prbs.zip(res.chunks(RES_PER_PRB)) {
            for (i, v) in chunk.iter().enumerate() {
                if let Some(slot) = row.get_mut(p * RES_PER_PRB + i) {
                    *slot = *v;
                }
            }
        }
    }

    pub fn populated_res(&self, symbol: u8) -> usize {
        self.samples[symbol as usize]
            .iter()
            .filter(|s| s.re != 0 || s.im != 0)
            .count()
    }
}

fn quantize(v: f64) -> i16 {
    v.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn generate_grid(
    carrier: &CarrierConfig,
    waveform: &WaveformSpec,
    allocation: &Allocation,
    rms: f64,
) -> Result<ResourceGrid, CuError> {
    allocation.validate(carrier.n_prb)?;
    let mut pn = Pn23::new(waveform.pn23_seed)?;
    let mut grid = ResourceGrid::zeros(carrier.n_prb);
    let bps = waveform.modulation.bits_per_symbol();
    let mut bits = vec![0u8; bps];
    for sym in allocation.symbols() {
        for prb in allocation.prbs() {
            let row = &mut grid.samples[sym as usize];
            for re in &mut row[prb * RES_PER_PRB..(prb + 1) * RES_PER_PRB] {
                bits.iter_mut().for_each(|b| *b = pn.next_bit());
                let p = waveform.modulation.map(&bits) * rms;
                *re = Iq::new(quantize(p.re), quantize(p.im));
            }
        }
    }
    Ok(grid)
}
