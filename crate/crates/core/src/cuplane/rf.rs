//! Virtual RF front end shared by the RU emulator, the virtual analyzer
//! (observes emissions), and the virtual signal generator (injects the
//! receive signal).

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::{section_prbs, ResourceGrid};
use crate::codec::{CaptureDirection, CaptureRecord, Iq, RES_PER_PRB};
use crate::sim::Nanos;

/// One symbol of one section radiated by the RU. Samples are the
/// single-stream IQ after decompression; per-port signals follow from the
/// beam applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emission {
    pub time_ns: Nanos,
    pub abs_slot: u64,
    pub symbol: u8,
    pub start_prb: u16,
    #[serde(default)]
    pub every_other_rb: bool,
    pub samples: Vec<Iq>,
    pub beam: AppliedBeam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AppliedBeam {
    /// No beamforming: the stream drives the single port named by the eAxC.
    Port(u16),
    /// Unit-power weight per port.
    Weights(Vec<Complex<f64>>),
}

impl AppliedBeam {
    fn gain(&self, port: usize) -> Complex<f64> {
        match self {
            AppliedBeam::Port(p) if *p as usize == port => Complex::new(1.0, 0.0),
            AppliedBeam::Port(_) => Complex::new(0.0, 0.0),
            AppliedBeam::Weights(w) => w.get(port).copied().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VirtualRf {
    pub ports: usize,
    emissions: Vec<Emission>,
    injections: BTreeMap<(u64, u8), Vec<Iq>>,
}

const KIND_EMISSION: u8 = 0;
const KIND_INJECTION: u8 = 1;

impl VirtualRf {
    pub fn new(ports: usize) -> Self {
        Self {
            ports,
            ..Self::default()
        }
    }

    pub fn emit(&mut self, e: Emission) {
        self.emissions.push(e);
    }

    pub fn emissions(&self) -> &[Emission] {
        &self.emissions
    }

    pub fn emissions_in(&self, abs_slot: u64) -> impl Iterator<Item = &Emission> {
        self.emissions
            .iter()
            .filter(move |e| e.abs_slot == abs_slot)
    }

    pub fn clear(&mut self) {
        self.emissions.clear();
        self.injections.clear();
    }

    /// Full-carrier receive samples for one symbol.
    pub fn inject(&mut self, abs_slot: u64, symbol: u8, samples: Vec<Iq>) {
        self.injections.insert((abs_slot, symbol), samples);
    }

    pub fn inject_grid(&mut self, abs_slot: u64, grid: &ResourceGrid) {
        for (s, row) in grid.samples.iter().enumerate() {
            if row.iter().any(|x| x.re != 0 || x.im != 0) {
                self.inject(abs_slot, s as u8, row.clone());
            }
        }
    }

    /// Receive samples for the PRBs a section covers; silence where
    /// nothing was injected.
    pub fn sample(
        &self,
        abs_slot: u64,
        symbol: u8,
        start_prb: u16,
        num_prb: usize,
        every_other_rb: bool,
    ) -> Vec<Iq> {
        let row = self.injections.get(&(abs_slot, symbol));
        section_prbs(start_prb, num_prb, every_other_rb)
            .flat_map(|p| p * RES_PER_PRB..(p + 1) * RES_PER_PRB)
            .map(|i| row.and_then(|r| r.get(i)).copied().unwrap_or_default())
            .collect()
    }

    /// Single-stream grid radiated in `abs_slot`, or `None` if silent.
    pub fn emitted_grid(&self, abs_slot: u64, n_prb: u16) -> Option<ResourceGrid> {
        let mut grid = ResourceGrid::zeros(n_prb);
        let mut any = false;
        for e in self.emissions_in(abs_slot) {
            any = true;
            if (e.symbol as usize) < grid.samples.len() {
                grid.scatter(e.symbol, e.start_prb, e.every_other_rb, &e.samples);
            }
        }
        any.then_some(grid)
    }

    /// Per-port signals for the emissions of a slot, at most
    /// `max_samples` REs per port.
    pub fn port_signals(&self, abs_slot: u64, max_samples: usize) -> Vec<Vec<Complex<f64>>> {
        let mut ports = vec![Vec::new(); self.ports];
        for e in self.emissions_in(abs_slot) {
            for s in &e.samples {
                if ports[0].len() >= max_samples {
                    return ports;
                }
                let x = Complex::new(s.re as f64, s.im as f64);
                for (p, out) in ports.iter_mut().enumerate() {
                    out.push(e.beam.gain(p) * x);
                }
            }
        }
        ports
    }

    /// Emissions and injections as harness capture records. Each payload
    /// is `kind(1) slot(8) symbol(1) start_prb(2) count(4)` followed by
    /// `count` big-endian I/Q pairs.
    pub fn to_capture_records(&self) -> Vec<CaptureRecord> {
        fn record(
            time_ns: Nanos,
            kind: u8,
            slot: u64,
            symbol: u8,
            start_prb: u16,
            iq: &[Iq],
        ) -> CaptureRecord {
            let mut b = Vec::with_capacity(16 + 4 * iq.len());
            b.push(kind);
            b.extend_from_slice(&slot.to_be_bytes());
            b.push(symbol);
            b.extend_from_slice(&start_prb.to_be_bytes());
            b.extend_from_slice(&(iq.len() as u32).to_be_bytes());
            for s in iq {
                b.extend_from_slice(&s.re.to_be_bytes());
                b.extend_from_slice(&s.im.to_be_bytes());
            }
            CaptureRecord {
                time_ns,
                direction: CaptureDirection::Harness,
                bytes: b,
            }
        }
        let mut out: Vec<_> = self
            .injections
            .iter()
            .map(|((slot, sym), iq)| record(0, KIND_INJECTION, *slot, *sym, 0, iq))
            .collect();
        out.extend(self.emissions.iter().map(|e| {
            record(
                e.time_ns,
                KIND_EMISSION,
                e.abs_slot,
                e.symbol,
                e.start_prb,
                &e.samples,
            )
        }));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emission(slot: u64, symbol: u8, beam: AppliedBeam) -> Emission {
        Emission {
            time_ns: 0,
            abs_slot: slot,
            symbol,
            start_prb: 1,
            every_other_rb: false,
            samples: vec![Iq::new(100, -50); 12],
            beam,
        }
    }

    #[test]
    fn emitted_grid_places_samples() {
        let mut rf = VirtualRf::new(4);
        assert!(rf.emitted_grid(0, 3).is_none());
        rf.emit(emission(0, 2, AppliedBeam::Port(0)));
        let g = rf.emitted_grid(0, 3).unwrap();
        assert_eq!(g.populated_res(2), 12);
        assert_eq!(g.symbol(2)[12], Iq::new(100, -50));
        assert_eq!(g.symbol(2)[11], Iq::new(0, 0));
        assert!(rf.emitted_grid(1, 3).is_none());
    }

    #[test]
    fn port_signals_follow_beam() {
        let mut rf = VirtualRf::new(2);
        rf.emit(emission(0, 0, AppliedBeam::Port(1)));
        let p = rf.port_signals(0, 4);
        assert_eq!(p[0].len(), 4);
        assert!(p[0].iter().all(|c| c.norm() == 0.0));
        assert!(p[1].iter().all(|c| *c == Complex::new(100.0, -50.0)));
    }

    #[test]
    fn sampling_injection() {
        let mut rf = VirtualRf::new(1);
        let mut row = vec![Iq::new(0, 0); 36];
        row[13] = Iq::new(7, 8);
        rf.inject(4, 0, row);
        let s = rf.sample(4, 0, 1, 1, false);
        assert_eq!(s[1], Iq::new(7, 8));
        assert!(rf
            .sample(4, 1, 1, 1, false)
            .iter()
            .all(|x| *x == Iq::new(0, 0)));
    }

    #[test]
    fn capture_records() {
        let mut rf = VirtualRf::new(1);
        rf.emit(emission(3, 1, AppliedBeam::Port(0)));
        let r = rf.to_capture_records();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].bytes.len(), 16 + 48);
        assert_eq!(r[0].bytes[9], 1);
    }
}
