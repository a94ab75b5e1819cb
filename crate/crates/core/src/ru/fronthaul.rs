//! Fronthaul endpoint of the emulator: C-Plane scheduling, downlink
//! transmission onto the virtual air interface, and uplink U-Plane replies.

use serde::{Deserialize, Serialize};

use super::emulator::{OruEmulator, RuPhase};
use crate::codec::{
    bfp_decompress, compress_res, decode_cplane, decode_ecpri, decode_uplane, encode_uplane,
    pack_eaxc, CplaneMessage, DataDirection, EaxcId, EcpriHeader, Iq, MessageType, RadioTiming,
    UplaneMessage, UplaneSection,
};
use crate::cuplane::beam::dequantize_weights;
use crate::cuplane::{
    AppliedBeam, Arrival, Counters, Emission, Plane, NO_BEAMFORMING, SYMBOLS_PER_SLOT,
};
use crate::mplane::model::COUNTERS;
use crate::mplane::Datastore;
use crate::sim::Nanos;

/// Device-side fronthaul statistics, mirrored into the datastore.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FronthaulCounters {
    pub cplane: Counters,
    pub uplane: Counters,
    /// Messages received while no carrier for their direction was active.
    pub not_ready: u64,
    pub unknown_beam: u64,
    pub malformed: u64,
    pub tdd_violation: u64,
    /// Downlink U-Plane with no matching C-Plane section.
    pub unscheduled: u64,
    pub ul_uplane_sent: u64,
}

const SCALARS: [&str; 6] = [
    "not-ready",
    "unknown-beam",
    "malformed",
    "tdd-violation",
    "unscheduled",
    "ul-uplane-sent",
];

impl FronthaulCounters {
    fn scalars(&self) -> [u64; 6] {
        [
            self.not_ready,
            self.unknown_beam,
            self.malformed,
            self.tdd_violation,
            self.unscheduled,
            self.ul_uplane_sent,
        ]
    }

    fn scalars_mut(&mut self) -> [&mut u64; 6] {
        [
            &mut self.not_ready,
            &mut self.unknown_beam,
            &mut self.malformed,
            &mut self.tdd_violation,
            &mut self.unscheduled,
            &mut self.ul_uplane_sent,
        ]
    }

    pub fn publish(&self, ds: &mut Datastore) {
        for (plane, c) in [("cplane", &self.cplane), ("uplane", &self.uplane)] {
            ds.set_leaf(
                &format!("{COUNTERS}/{plane}/received"),
                c.received.to_string(),
            );
            ds.set_leaf(
                &format!("{COUNTERS}/{plane}/dropped-early"),
                c.dropped_early.to_string(),
            );
            ds.set_leaf(
                &format!("{COUNTERS}/{plane}/dropped-late"),
                c.dropped_late.to_string(),
            );
        }
        for (name, v) in SCALARS.iter().zip(self.scalars()) {
            ds.set_leaf(&format!("{COUNTERS}/{name}"), v.to_string());
        }
    }

    /// Parses counters read back over the management plane.
    pub fn from_datastore(ds: &Datastore) -> Option<Self> {
        let num = |p: String| ds.leaf(&p)?.parse::<u64>().ok();
        let plane = |name: &str| {
            Some(Counters {
                received: num(format!("{COUNTERS}/{name}/received"))?,
                dropped_early: num(format!("{COUNTERS}/{name}/dropped-early"))?,
                dropped_late: num(format!("{COUNTERS}/{name}/dropped-late"))?,
            })
        };
        let mut c = FronthaulCounters {
            cplane: plane("cplane")?,
            uplane: plane("uplane")?,
            ..Default::default()
        };
        for (name, slot) in SCALARS.iter().zip(c.scalars_mut()) {
            *slot = num(format!("{COUNTERS}/{name}"))?;
        }
        Some(c)
    }
}

/// Downlink section scheduled by C-Plane, awaiting its U-Plane data.
#[derive(Debug, Clone, PartialEq)]
pub struct DlSection {
    pub start_prb: u16,
    pub every_other_rb: bool,
    pub start_symbol: u8,
    pub num_symbol: u8,
    pub beam: AppliedBeam,
}

/// One uplink symbol to sample and send once it has been received.
#[derive(Debug, Clone, PartialEq)]
pub struct UlJob {
    pub eaxc: EaxcId,
    pub abs_slot: u64,
    pub symbol: u8,
    pub section_id: u16,
    pub start_prb: u16,
    pub wire_num_prb: u8,
    pub num_prb: usize,
    pub every_other_rb: bool,
}

impl OruEmulator {
    /// Handles one fronthaul frame arriving at `now`.
    pub fn receive_fronthaul(&mut self, now: Nanos, bytes: &[u8]) {
        self.log_fronthaul(now, bytes.len());
        let kind = decode_ecpri(bytes, self.codec.eaxc_layout).map(|(h, _)| h.message_type);
        match kind {
            Ok(MessageType::RtControl) => match decode_cplane(bytes, &self.codec) {
                Ok(m) => self.on_cplane(now, m),
                Err(_) => self.counters.malformed += 1,
            },
            Ok(MessageType::IqData) => match decode_uplane(bytes, &self.codec) {
                Ok(m) => self.on_uplane(now, m),
                Err(_) => self.counters.malformed += 1,
            },
            Err(_) => self.counters.malformed += 1,
        }
        self.counters.publish(self.server.datastore_mut());
    }

    fn ready_for(&self, dir: DataDirection) -> bool {
        let carrier = match dir {
            DataDirection::Downlink => "tx0",
            DataDirection::Uplink => "rx0",
        };
        self.phase == RuPhase::CarriersActive && self.carrier_active(carrier)
    }

    /// Absolute slot and advance for a message referring to `symbol`.
    fn locate(&self, now: Nanos, timing: &RadioTiming) -> (u64, i64) {
        let near = now / self.cfg.carrier.slot_duration_ns();
        let abs = self.cfg.carrier.resolve_slot(timing, near);
        let ota = self.cfg.carrier.ota_time_ns(abs, timing.symbol_id);
        (abs, ota as i64 - now as i64)
    }

    fn on_cplane(&mut self, now: Nanos, m: CplaneMessage) {
        if !self.ready_for(m.data_direction) {
            self.counters.not_ready += 1;
            return;
        }
        let (abs_slot, advance) = self.locate(now, &m.timing);
        let arrival = self.cfg.window.classify(Plane::Control, advance);
        self.counters.cplane.record(arrival);
        if arrival != Arrival::OnTime {
            return;
        }
        let eaxc = m.header.eaxc;
        let Ok(key) = pack_eaxc(&eaxc) else {
            self.counters.malformed += 1;
            return;
        };
        for s in &m.sections {
            if !self.cfg.carrier.symbols_allow(
                abs_slot,
                m.timing.symbol_id,
                s.num_symbol,
                m.data_direction,
            ) {
                self.counters.tdd_violation += 1;
                continue;
            }
            match m.data_direction {
                DataDirection::Downlink => {
                    let beam = if let Some(q) = &s.beam_weights {
                        match dequantize_weights(q) {
                            Some(w) if w.len() == self.codec.ru_ports => AppliedBeam::Weights(w),
                            _ => {
                                self.counters.malformed += 1;
                                continue;
                            }
                        }
                    } else if s.beam_id == NO_BEAMFORMING {
                        AppliedBeam::Port(eaxc.ru_port_id)
                    } else if let Some(e) = self.cfg.beam_table.get(s.beam_id) {
                        AppliedBeam::Weights(e.weights.clone())
                    } else {
                        self.counters.unknown_beam += 1;
                        continue;
                    };
                    self.pending.insert(
                        (key, abs_slot, s.section_id),
                        DlSection {
                            start_prb: s.start_prb,
                            every_other_rb: s.rb_flag,
                            start_symbol: m.timing.symbol_id,
                            num_symbol: s.num_symbol,
                            beam,
                        },
                    );
                }
                DataDirection::Uplink => {
                    if s.beam_id != NO_BEAMFORMING
                        && s.beam_weights.is_none()
                        && self.cfg.beam_table.get(s.beam_id).is_none()
                    {
                        self.counters.unknown_beam += 1;
                        continue;
                    }
                    let Ok(num_prb) = self.codec.effective_num_prb(s.start_prb, s.num_prb) else {
                        self.counters.malformed += 1;
                        continue;
                    };
                    let sym_ns = self.cfg.carrier.slot_duration_ns() / SYMBOLS_PER_SLOT as u64;
                    for k in 0..s.num_symbol {
                        let symbol = m.timing.symbol_id + k;
                        let at = self.cfg.carrier.ota_time_ns(abs_slot, symbol)
                            + sym_ns
                            + self.cfg.ul_processing_ns;
                        self.schedule_ul(
                            at,
                            UlJob {
                                eaxc,
                                abs_slot,
                                symbol,
                                section_id: s.section_id,
                                start_prb: s.start_prb,
                                wire_num_prb: s.num_prb,
                                num_prb,
                                every_other_rb: s.rb_flag,
                            },
                        );
                    }
                }
            }
        }
    }

    fn on_uplane(&mut self, now: Nanos, m: UplaneMessage) {
        if m.data_direction != DataDirection::Downlink || !self.ready_for(DataDirection::Downlink) {
            self.counters.not_ready += 1;
            return;
        }
        let (abs_slot, advance) = self.locate(now, &m.timing);
        let arrival = self.cfg.window.classify(Plane::User, advance);
        self.counters.uplane.record(arrival);
        if arrival != Arrival::OnTime {
            return;
        }
        let Ok(key) = pack_eaxc(&m.header.eaxc) else {
            self.counters.malformed += 1;
            return;
        };
        let symbol = m.timing.symbol_id;
        for s in &m.sections {
            let sched = self
                .pending
                .get(&(key, abs_slot, s.section_id))
                .filter(|p| {
                    p.start_prb == s.start_prb
                        && p.every_other_rb == s.rb_flag
                        && (p.start_symbol..p.start_symbol + p.num_symbol).contains(&symbol)
                });
            let Some(sched) = sched else {
                self.counters.unscheduled += 1;
                continue;
            };
            let samples: Vec<Iq> = s.prbs.iter().flat_map(bfp_decompress).collect();
            let e = Emission {
                time_ns: self.cfg.carrier.ota_time_ns(abs_slot, symbol),
                abs_slot,
                symbol,
                start_prb: s.start_prb,
                every_other_rb: s.rb_flag,
                samples,
                beam: sched.beam.clone(),
            };
            self.rf.emit(e);
            self.log_radio(now, abs_slot, symbol);
        }
    }

    pub(super) fn run_ul_job(&mut self, now: Nanos, job: UlJob) {
        if !self.ready_for(DataDirection::Uplink) {
            return;
        }
        let samples = self.rf.sample(
            job.abs_slot,
            job.symbol,
            job.start_prb,
            job.num_prb,
            job.every_other_rb,
        );
        let Ok(key) = pack_eaxc(&job.eaxc) else {
            return;
        };
        let seq = self.ul_seq.entry(key).or_default();
        let msg = UplaneMessage {
            header: EcpriHeader::new(MessageType::IqData, job.eaxc, *seq),
            data_direction: DataDirection::Uplink,
            timing: self.cfg.carrier.timing(job.abs_slot, job.symbol),
            sections: vec![UplaneSection {
                section_id: job.section_id,
                rb_flag: job.every_other_rb,
                sym_inc: false,
                start_prb: job.start_prb,
                num_prb: job.wire_num_prb,
                prbs: compress_res(&samples),
            }],
        };
        *seq = seq.wrapping_add(1);
        match encode_uplane(&msg, &self.codec) {
            Ok(bytes) => {
                self.log_fronthaul(now, bytes.len());
                self.fh_out.push((now, bytes));
                self.counters.ul_uplane_sent += 1;
            }
            Err(_) => self.counters.malformed += 1,
        }
        self.counters.publish(self.server.datastore_mut());
    }

    pub(super) fn reset_fronthaul(&mut self) {
        self.pending.clear();
        self.counters = FronthaulCounters::default();
        self.counters.publish(self.server.datastore_mut());
    }
}
