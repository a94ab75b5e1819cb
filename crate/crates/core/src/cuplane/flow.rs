//! Timed C-Plane and U-Plane stimulus flows.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::beam::{quantize_weights, NO_BEAMFORMING};
use super::carrier::{CarrierConfig, SYMBOLS_PER_SLOT};
use super::dlm::{DelayWindow, Plane};
use super::error::CuError;
use super::grid::{Allocation, ResourceGrid};
use super::zc::zadoff_chu;
use crate::codec::{
    compress_res, encode_cplane, encode_uplane, CodecContext, CplaneMessage, CplaneSection,
    DataDirection, EaxcId, EcpriHeader, Iq, MessageType, SectionType, St3Fields, UplaneMessage,
    UplaneSection, RES_PER_PRB,
};
use crate::sim::Nanos;

/// Section id used for every single-section flow.
pub const SECTION_ID: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedMessage {
    pub send_time_ns: Nanos,
    /// Over-the-air time of the symbol the message refers to.
    pub ota_ns: Nanos,
    pub plane: Plane,
    pub direction: DataDirection,
    pub abs_slot: u64,
    pub symbol: u8,
    pub bytes: Vec<u8>,
}

impl TimedMessage {
    pub fn advance_ns(&self) -> i64 {
        self.ota_ns as i64 - self.send_time_ns as i64
    }

    /// Reschedule so the message arrives `advance_ns` before its symbol.
    pub fn retime(&mut self, advance_ns: i64) {
        self.send_time_ns = (self.ota_ns as i64 - advance_ns).max(0) as Nanos;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BeamSpec {
    None,
    Id(u16),
    Weights {
        beam_id: u16,
        weights: Vec<Complex<f64>>,
    },
}

impl BeamSpec {
    fn section_fields(&self) -> (u16, Option<Vec<Iq>>) {
        match self {
            BeamSpec::None => (NO_BEAMFORMING, None),
            BeamSpec::Id(id) => (*id, None),
            BeamSpec::Weights { beam_id, weights } => (*beam_id, Some(quantize_weights(weights))),
        }
    }
}

/// Per-eAxC flow state: addressing, timing targets, and sequence numbers.
#[derive(Debug, Clone)]
pub struct FlowContext {
    pub carrier: CarrierConfig,
    pub codec: CodecContext,
    pub eaxc: EaxcId,
    pub window: DelayWindow,
    cp_seq: u8,
    up_seq: u8,
}

impl FlowContext {
    pub fn new(
        carrier: CarrierConfig,
        codec: CodecContext,
        eaxc: EaxcId,
        window: DelayWindow,
    ) -> Self {
        Self {
            carrier,
            codec,
            eaxc,
            window,
            cp_seq: 0,
            up_seq: 0,
        }
    }

    fn next_cp_seq(&mut self) -> u8 {
        let s = self.cp_seq;
        self.cp_seq = self.cp_seq.wrapping_add(1);
        s
    }

    fn next_up_seq(&mut self) -> u8 {
        let s = self.up_seq;
        self.up_seq = self.up_seq.wrapping_add(1);
        s
    }

    fn timed(
        &self,
        plane: Plane,
        direction: DataDirection,
        abs_slot: u64,
        symbol: u8,
        bytes: Vec<u8>,
    ) -> TimedMessage {
        let ota_ns = self.carrier.ota_time_ns(abs_slot, symbol);
        let mut m = TimedMessage {
            send_time_ns: 0,
            ota_ns,
            plane,
            direction,
            abs_slot,
            symbol,
            bytes,
        };
        m.retime(self.window.midpoint(plane));
        m
    }

    fn wire_num_prb(
        &self,
        start_prb: u16,
        num_prb: u16,
        every_other_rb: bool,
    ) -> Result<u8, CuError> {
        if num_prb == 0 {
            return Err(CuError::AllocationOutOfRange("empty PRB allocation".into()));
        }
        if let Ok(n) = u8::try_from(num_prb) {
            return Ok(n);
        }
        if !every_other_rb && start_prb + num_prb == self.carrier.n_prb {
            return Ok(0);
        }
        Err(CuError::AllocationOutOfRange(format!(
            "{num_prb} PRBs need the to-edge encoding but stop short of the carrier edge"
        )))
    }

    fn check_slot(
        &self,
        abs_slot: u64,
        alloc: &Allocation,
        dir: DataDirection,
    ) -> Result<(), CuError> {
        alloc.validate(self.carrier.n_prb)?;
        if alloc.num_symbols == 0 {
            return Err(CuError::AllocationOutOfRange(
                "empty symbol allocation".into(),
            ));
        }
        if !self
            .carrier
            .symbols_allow(abs_slot, alloc.start_symbol, alloc.num_symbols, dir)
        {
            return Err(CuError::WrongSlotDirection {
                slot: abs_slot,
                wanted: match dir {
                    DataDirection::Downlink => "downlink",
                    DataDirection::Uplink => "uplink",
                },
            });
        }
        Ok(())
    }

    fn cplane(
        &mut self,
        dir: DataDirection,
        abs_slot: u64,
        alloc: &Allocation,
        beam: &BeamSpec,
        st3: Option<St3Fields>,
    ) -> Result<TimedMessage, CuError> {
        let (beam_id, beam_weights) = beam.section_fields();
        let msg = CplaneMessage {
            header: EcpriHeader::new(MessageType::RtControl, self.eaxc, self.next_cp_seq()),
            data_direction: dir,
            timing: self.carrier.timing(abs_slot, alloc.start_symbol),
            section_type: if st3.is_some() {
                SectionType::St3
            } else {
                SectionType::St1
            },
            st3,
            sections: vec![CplaneSection {
                section_id: SECTION_ID,
                rb_flag: alloc.every_other_rb,
                sym_inc: false,
                start_prb: alloc.start_prb,
                num_prb: self.wire_num_prb(alloc.start_prb, alloc.num_prb, alloc.every_other_rb)?,
                re_mask: 0xFFF,
                num_symbol: alloc.num_symbols,
                beam_id,
                beam_weights,
            }],
        };
        let bytes = encode_cplane(&msg, &self.codec)?;
        Ok(self.timed(Plane::Control, dir, abs_slot, alloc.start_symbol, bytes))
    }

    /// U-Plane message carrying `samples` for one symbol of a section.
    #[allow(clippy::too_many_arguments)]
    pub fn uplane(
        &mut self,
        dir: DataDirection,
        abs_slot: u64,
        symbol: u8,
        start_prb: u16,
        num_prb: u16,
        every_other_rb: bool,
        samples: &[Iq],
    ) -> Result<TimedMessage, CuError> {
        let msg = UplaneMessage {
            header: EcpriHeader::new(MessageType::IqData, self.eaxc, self.next_up_seq()),
            data_direction: dir,
            timing: self.carrier.timing(abs_slot, symbol),
            sections: vec![UplaneSection {
                section_id: SECTION_ID,
                rb_flag: every_other_rb,
                sym_inc: false,
                start_prb,
                num_prb: self.wire_num_prb(start_prb, num_prb, every_other_rb)?,
                prbs: compress_res(samples),
            }],
        };
        let bytes = encode_uplane(&msg, &self.codec)?;
        Ok(self.timed(Plane::User, dir, abs_slot, symbol, bytes))
    }
}

/// One ST1 C-Plane message for the allocation, then one U-Plane message
/// per allocated symbol, each scheduled mid-window.
pub fn build_dl_flow(
    ctx: &mut FlowContext,
    grid: &ResourceGrid,
    alloc: &Allocation,
    abs_slot: u64,
    beam: &BeamSpec,
    carrier_active: bool,
) -> Result<Vec<TimedMessage>, CuError> {
    if !carrier_active {
        return Err(CuError::InactiveCarrier);
    }
    ctx.check_slot(abs_slot, alloc, DataDirection::Downlink)?;
    let mut out = vec![ctx.cplane(DataDirection::Downlink, abs_slot, alloc, beam, None)?];
    for sym in alloc.symbols() {
        let samples = grid.gather(
            sym,
            alloc.start_prb,
            alloc.num_prb as usize,
            alloc.every_other_rb,
        );
        out.push(ctx.uplane(
            DataDirection::Downlink,
            abs_slot,
            sym,
            alloc.start_prb,
            alloc.num_prb,
            alloc.every_other_rb,
            &samples,
        )?);
    }
    Ok(out)
}

/// ST1 C-Plane scheduling for an uplink allocation. The receive signal is
/// injected separately through the virtual signal generator.
pub fn build_ul_flow(
    ctx: &mut FlowContext,
    alloc: &Allocation,
    abs_slot: u64,
    beam: &BeamSpec,
    carrier_active: bool,
) -> Result<Vec<TimedMessage>, CuError> {
    if !carrier_active {
        return Err(CuError::InactiveCarrier);
    }
    ctx.check_slot(abs_slot, alloc, DataDirection::Uplink)?;
    Ok(vec![ctx.cplane(
        DataDirection::Uplink,
        abs_slot,
        alloc,
        beam,
        None,
    )?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrachConfig {
    pub root: u32,
    pub length: usize,
    pub start_prb: u16,
    pub num_prb: u16,
    /// First preamble RE inside the PRACH PRBs.
    pub re_offset: usize,
    pub start_symbol: u8,
    pub num_symbols: u8,
    /// Occasion start after the slot boundary, in samples.
    pub time_offset: u16,
    pub cp_length: u16,
    /// FFT size exponent in the high nibble, numerology in the low nibble.
    pub frame_structure: u8,
}

impl Default for PrachConfig {
    fn default() -> Self {
        Self {
            root: 1,
            length: 139,
            start_prb: 60,
            num_prb: 12,
            re_offset: 2,
            start_symbol: 0,
            num_symbols: 12,
            time_offset: 0,
            cp_length: 936,
            frame_structure: 0x81,
        }
    }
}

impl PrachConfig {
    pub fn allocation(&self) -> Allocation {
        Allocation {
            start_prb: self.start_prb,
            num_prb: self.num_prb,
            start_symbol: self.start_symbol,
            num_symbols: self.num_symbols,
            every_other_rb: false,
        }
    }

    /// First preamble RE relative to the carrier centre, in half-subcarrier units.
    pub fn freq_offset(&self, carrier: &CarrierConfig) -> i32 {
        let first = self.start_prb as i64 * RES_PER_PRB as i64 + self.re_offset as i64;
        let centre = carrier.n_prb as i64 * RES_PER_PRB as i64 / 2;
        (2 * (first - centre)) as i32
    }

    pub fn validate(&self, carrier: &CarrierConfig) -> Result<(), CuError> {
        self.allocation().validate(carrier.n_prb)?;
        if self.re_offset + self.length > self.num_prb as usize * RES_PER_PRB {
            return Err(CuError::AllocationOutOfRange(
                "preamble exceeds the PRACH PRBs".into(),
            ));
        }
        if self.length.is_multiple_of(2) || self.root == 0 || self.root as usize >= self.length {
            return Err(CuError::AllocationOutOfRange(format!(
                "Zadoff-Chu root {} / length {}",
                self.root, self.length
            )));
        }
        if self.start_symbol + self.num_symbols > SYMBOLS_PER_SLOT {
            return Err(CuError::AllocationOutOfRange(
                "PRACH symbols exceed the slot".into(),
            ));
        }
        Ok(())
    }
}

pub fn build_prach_st3_flow(
    ctx: &mut FlowContext,
    prach: &PrachConfig,
    abs_slot: u64,
    carrier_active: bool,
) -> Result<Vec<TimedMessage>, CuError> {
    if !carrier_active {
        return Err(CuError::InactiveCarrier);
    }
    prach.validate(&ctx.carrier)?;
    let alloc = prach.allocation();
    ctx.check_slot(abs_slot, &alloc, DataDirection::Uplink)?;
    let st3 = St3Fields {
        time_offset: prach.time_offset,
        frame_structure: prach.frame_structure,
        cp_length: prach.cp_length,
        freq_offset: prach.freq_offset(&ctx.carrier),
    };
    Ok(vec![ctx.cplane(
        DataDirection::Uplink,
        abs_slot,
        &alloc,
        &BeamSpec::None,
        Some(st3),
    )?])
}

/// Receive grid holding the preamble on every PRACH symbol.
pub fn prach_injection(
    carrier: &CarrierConfig,
    prach: &PrachConfig,
    rms: f64,
) -> Result<ResourceGrid, CuError> {
    prach.validate(carrier)?;
    let zc = zadoff_chu(prach.root, prach.length);
    let mut grid = ResourceGrid::zeros(carrier.n_prb);
    let first = prach.start_prb as usize * RES_PER_PRB + prach.re_offset;
    for sym in prach.allocation().symbols() {
        for (i, z) in zc.iter().enumerate() {
            grid.samples[sym as usize][first + i] =
                Iq::new((z.re * rms).round() as i16, (z.im * rms).round() as i16);
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_cplane, decode_uplane, EaxcLayout};
    use crate::cuplane::beam::steering_weights;
    use crate::cuplane::grid::{generate_grid, WaveformSpec, DEFAULT_RMS};

    fn ctx() -> FlowContext {
        let carrier = CarrierConfig::default();
        let layout = EaxcLayout::default();
        FlowContext::new(
            carrier,
            CodecContext::default(),
            EaxcId::new(0, 0, 0, 0, layout),
            DelayWindow::default(),
        )
    }

    fn full_alloc() -> Allocation {
        Allocation::full(&CarrierConfig::default())
    }

    fn full_grid(c: &CarrierConfig) -> ResourceGrid {
        generate_grid(
            c,
            &WaveformSpec::downlink(),
            &Allocation::full(c),
            DEFAULT_RMS,
        )
        .unwrap()
    }

    #[test]
    fn one_slot_flow_has_one_cplane_and_fourteen_uplane() {
        let mut cx = ctx();
        let g = full_grid(&cx.carrier);
        let a = Allocation::full(&cx.carrier);
        let f = build_dl_flow(&mut cx, &g, &a, 10, &BeamSpec::Id(5), true).unwrap();
        assert_eq!(f.len(), 15);
        assert_eq!(f.iter().filter(|m| m.plane == Plane::Control).count(), 1);
        assert_eq!(f.iter().filter(|m| m.plane == Plane::User).count(), 14);

        let cp = decode_cplane(&f[0].bytes, &cx.codec).unwrap();
        assert_eq!(cp.section_type, SectionType::St1);
        assert_eq!(cp.sections[0].beam_id, 5);
        assert!(!cp.sections[0].extension_flag());
        for (i, m) in f[1..].iter().enumerate() {
            let up = decode_uplane(&m.bytes, &cx.codec).unwrap();
            assert_eq!(up.timing.symbol_id, i as u8);
            assert_eq!(up.sections[0].prbs.len(), 133);
            assert_eq!(up.header.sequence_id, i as u8);
        }
    }

    #[test]
    fn messages_scheduled_inside_window() {
        let mut cx = ctx();
        let g = full_grid(&cx.carrier);
        let f = build_dl_flow(&mut cx, &g, &full_alloc(), 20, &BeamSpec::None, true).unwrap();
        for m in &f {
            let (lo, hi) = cx.window.bounds(m.plane);
            assert!((lo..=hi).contains(&m.advance_ns()));
        }
    }

    #[test]
    fn inline_weights_set_extension() {
        let mut cx = ctx();
        let g = full_grid(&cx.carrier);
        let beam = BeamSpec::Weights {
            beam_id: 100,
            weights: steering_weights(32, 12.0),
        };
        let f = build_dl_flow(&mut cx, &g, &full_alloc(), 0, &beam, true).unwrap();
        let cp = decode_cplane(&f[0].bytes, &cx.codec).unwrap();
        assert!(cp.sections[0].extension_flag());
        assert_eq!(cp.sections[0].beam_weights.as_ref().unwrap().len(), 32);
    }

    #[test]
    fn inactive_carrier_and_wrong_slot() {
        let mut cx = ctx();
        let g = full_grid(&cx.carrier);
        let a = Allocation::full(&cx.carrier);
        assert_eq!(
            build_dl_flow(&mut cx, &g, &a, 0, &BeamSpec::None, false),
            Err(CuError::InactiveCarrier)
        );
        assert!(matches!(
            build_dl_flow(&mut cx, &g, &a, 4, &BeamSpec::None, true),
            Err(CuError::WrongSlotDirection { .. })
        ));
        assert!(matches!(
            build_ul_flow(&mut cx, &a, 0, &BeamSpec::None, true),
            Err(CuError::WrongSlotDirection { .. })
        ));
        assert!(matches!(
            build_prach_st3_flow(&mut cx, &PrachConfig::default(), 2, true),
            Err(CuError::WrongSlotDirection { .. })
        ));
    }

    #[test]
    fn prach_st3_fields() {
        let mut cx = ctx();
        let p = PrachConfig::default();
        let f = build_prach_st3_flow(&mut cx, &p, 4, true).unwrap();
        assert_eq!(f.len(), 1);
        let cp = decode_cplane(&f[0].bytes, &cx.codec).unwrap();
        assert_eq!(cp.section_type, SectionType::St3);
        let st3 = cp.st3.unwrap();
        assert_eq!(st3.cp_length, 936);
        // First preamble RE 722 against centre 798.
        assert_eq!(st3.freq_offset, -152);
        assert_eq!(cp.data_direction, DataDirection::Uplink);
    }

    #[test]
    fn tdd_discipline_in_encoded_timing() {
        let mut cx = ctx();
        let g = full_grid(&cx.carrier);
        let a = Allocation::full(&cx.carrier);
        for slot in 0..20u64 {
            if let Ok(f) = build_dl_flow(&mut cx, &g, &a, slot, &BeamSpec::None, true) {
                for m in f.iter().filter(|m| m.plane == Plane::User) {
                    let up = decode_uplane(&m.bytes, &cx.codec).unwrap();
                    let s = cx.carrier.resolve_slot(&up.timing, slot);
                    assert_eq!(
                        cx.carrier.symbol_direction(s, up.timing.symbol_id),
                        Some(DataDirection::Downlink)
                    );
                }
            }
        }
    }

    #[test]
    fn retime_sets_advance() {
        let mut cx = ctx();
        let g = full_grid(&cx.carrier);
        let mut f = build_dl_flow(&mut cx, &g, &full_alloc(), 10, &BeamSpec::None, true).unwrap();
        f[3].retime(10_000);
        assert_eq!(f[3].advance_ns(), 10_000);
    }
}
