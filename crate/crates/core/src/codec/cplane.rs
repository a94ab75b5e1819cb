//! C-Plane (real-time control) messages, section types 1 and 3.
//!
//! Application payload layout after the eCPRI header:
//!
//! ```text
//! dataDirection(1) payloadVersion(3) filterIndex(4)
//! frameId(8) subframeId(4) slotId(6) startSymbolId(6)
//! numberOfSections(8) sectionType(8)
//! [ST3 only] timeOffset(16) frameStructure(8) cpLength(16) freqOffset(24, signed)
//! per section:
//!   sectionId(12) rb(1) symInc(1) startPrb(10) numPrb(8)
//!   reMask(12) numSymbol(4) ef(1) beamId(15)
//!   [ef] ef(1)=0 extType(7)=1 weightCount(16) weightCount x (I(16) Q(16))
//! ```

use serde::{Deserialize, Serialize};

use super::bfp::Iq;
use super::bits::{BitReader, BitWriter};
use super::ecpri::{decode_ecpri, frame_ecpri, EcpriHeader, MessageType};
use super::error::{check_signed_width, check_width, CodecError, Result};
use super::{read_app_header, write_app_header, CodecContext, DataDirection, RadioTiming};

const BEAM_WEIGHT_EXT: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectionType {
    St1,
    St3,
}

impl SectionType {
    fn wire_value(self) -> u8 {
        match self {
            SectionType::St1 => 1,
            SectionType::St3 => 3,
        }
    }
}

/// PRACH / mixed-numerology parameters carried by section type 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct St3Fields {
    pub time_offset: u16,
    pub frame_structure: u8,
    pub cp_length: u16,
    /// Signed 24-bit frequency offset.
    pub freq_offset: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CplaneSection {
    pub section_id: u16,
    pub rb_flag: bool,
    pub sym_inc: bool,
    pub start_prb: u16,
    /// 0 means "all PRBs from start_prb".
    pub num_prb: u8,
    pub re_mask: u16,
    pub num_symbol: u8,
    pub beam_id: u16,
    /// Inline weights, one per RU port. Their presence sets the extension flag.
    pub beam_weights: Option<Vec<Iq>>,
}

impl CplaneSection {
    pub fn extension_flag(&self) -> bool {
        self.beam_weights.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CplaneMessage {
    pub header: EcpriHeader,
    pub data_direction: DataDirection,
    pub timing: RadioTiming,
    pub section_type: SectionType,
    pub st3: Option<St3Fields>,
    pub sections: Vec<CplaneSection>,
}

impl CplaneMessage {
    pub fn validate(&self, ctx: &CodecContext) -> Result<()> {
        if self.sections.is_empty() {
            return Err(CodecError::Structure(
                "C-Plane message has no sections".into(),
            ));
        }
        if self.sections.len() > u8::MAX as usize {
            return Err(CodecError::Structure(format!(
                "{} sections exceed 255",
                self.sections.len()
            )));
        }
        match (self.section_type, &self.st3) {
            (SectionType::St3, None) => {
                return Err(CodecError::Structure(
                    "section type 3 without its extra fields".into(),
                ))
            }
            (SectionType::St1, Some(_)) => {
                return Err(CodecError::Structure(
                    "section type 1 carrying section type 3 fields".into(),
                ))
            }
            _ => {}
        }
        if self.header.message_type != MessageType::RtControl {
            return Err(CodecError::Structure(
                "C-Plane message must use RT_CONTROL".into(),
            ));
        }
        for s in &self.sections {
            if let Some(w) = &s.beam_weights {
                if w.len() != ctx.ru_ports {
                    return Err(CodecError::Structure(format!(
                        "beam weight count {} does not match {} RU ports",
                        w.len(),
                        ctx.ru_ports
                    )));
                }
            }
        }
        Ok(())
    }
}

fn write_section(w: &mut BitWriter, s: &CplaneSection) -> Result<()> {
    check_width("section_id", s.section_id as i64, 12)?;
    check_width("start_prb", s.start_prb as i64, 10)?;
    check_width("re_mask", s.re_mask as i64, 12)?;
    check_width("num_symbol", s.num_symbol as i64, 4)?;
    check_width("beam_id", s.beam_id as i64, 15)?;
    w.put(s.section_id as u64, 12);
    w.put_bool(s.rb_flag);
    w.put_bool(s.sym_inc);
    w.put(s.start_prb as u64, 10);
    w.put(s.num_prb as u64, 8);
    w.put(s.re_mask as u64, 12);
    w.put(s.num_symbol as u64, 4);
    w.put_bool(s.extension_flag());
    w.put(s.beam_id as u64, 15);
    if let Some(weights) = &s.beam_weights {
        w.put_bool(false); // no further extension
        w.put(BEAM_WEIGHT_EXT, 7);
        w.put(weights.len() as u64, 16);
        for c in weights {
            w.put_signed(c.re as i64, 16);
            w.put_signed(c.im as i64, 16);
        }
    }
    w.align();
    Ok(())
}

fn read_section(r: &mut BitReader<'_>) -> Result<CplaneSection> {
    let mut s = CplaneSection {
        section_id: r.get(12)? as u16,
        rb_flag: r.get_bool()?,
        sym_inc: r.get_bool()?,
        start_prb: r.get(10)? as u16,
        num_prb: r.get(8)? as u8,
        re_mask: r.get(12)? as u16,
        num_symbol: r.get(4)? as u8,
        ..Default::default()
    };
    let ef = r.get_bool()?;
    s.beam_id = r.get(15)? as u16;
    if ef {
        if r.get_bool()? {
            return Err(CodecError::Structure(
                "chained section extensions are not supported".into(),
            ));
        }
        let ext_type = r.get(7)?;
        if ext_type != BEAM_WEIGHT_EXT {
            return Err(CodecError::Structure(format!(
                "unsupported section extension {ext_type}"
            )));
        }
        let count = r.get(16)? as usize;
        let mut weights = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let re = r.get_signed(16)? as i16;
            let im = r.get_signed(16)? as i16;
            weights.push(Iq::new(re, im));
        }
        s.beam_weights = Some(weights);
    }
    r.align();
    Ok(s)
}

/// Encodes a complete eCPRI frame. The header's `payload_size` is derived
/// from the encoded application payload.
pub fn encode_cplane(msg: &CplaneMessage, ctx: &CodecContext) -> Result<Vec<u8>> {
    msg.validate(ctx)?;
    let mut w = BitWriter::new();
    write_app_header(&mut w, msg.data_direction, &msg.timing)?;
    w.put(msg.sections.len() as u64, 8);
    w.put(msg.section_type.wire_value() as u64, 8);
    if let Some(st3) = &msg.st3 {
        check_signed_width("freq_offset", st3.freq_offset as i64, 24)?;
        w.put(st3.time_offset as u64, 16);
        w.put(st3.frame_structure as u64, 8);
        w.put(st3.cp_length as u64, 16);
        w.put_signed(st3.freq_offset as i64, 24);
    }
    for s in &msg.sections {
        write_section(&mut w, s)?;
    }
    frame_ecpri(msg.header, &w.finish())
}

pub fn decode_cplane(frame: &[u8], ctx: &CodecContext) -> Result<CplaneMessage> {
    let (header, payload) = decode_ecpri(frame, ctx.eaxc_layout)?;
    if header.message_type != MessageType::RtControl {
        return Err(CodecError::Structure("not a C-Plane frame".into()));
    }
    let mut r = BitReader::new(payload);
    let (data_direction, timing) = read_app_header(&mut r)?;
    let count = r.get(8)? as usize;
    let section_type = match r.get(8)? as u8 {
        1 => SectionType::St1,
        3 => SectionType::St3,
        other => return Err(CodecError::UnsupportedSectionType(other)),
    };
    let st3 = if section_type == SectionType::St3 {
        Some(St3Fields {
            time_offset: r.get(16)? as u16,
            frame_structure: r.get(8)? as u8,
            cp_length: r.get(16)? as u16,
            freq_offset: r.get_signed(24)? as i32,
        })
    } else {
        None
    };
    if count == 0 {
        return Err(CodecError::Structure(
            "C-Plane message has no sections".into(),
        ));
    }
    let mut sections = Vec::with_capacity(count);
    for _ in 0..count {
        sections.push(read_section(&mut r)?);
    }
    if !r.is_empty() {
        return Err(CodecError::TrailingBytes(r.remaining_bytes()));
    }
    let msg = CplaneMessage {
        header,
        data_direction,
        timing,
        section_type,
        st3,
        sections,
    };
    msg.validate(ctx)?;
    Ok(msg)
}
