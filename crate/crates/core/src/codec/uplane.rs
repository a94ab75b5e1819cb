//! U-Plane (IQ data) messages.
//!
//! ```text
//! dataDirection(1) payloadVersion(3) filterIndex(4)
//! frameId(8) subframeId(4) slotId(6) symbolId(6)
//! per section, until the payload ends:
//!   sectionId(12) rb(1) symInc(1) startPrb(10) numPrb(8)
//!   effective numPrb x [ reserved(4) exponent(4) 24 x mantissa(9) ]
//! ```

use serde::{Deserialize, Serialize};

use super::bfp::PrbBlock;
use super::bits::{BitReader, BitWriter};
use super::ecpri::{decode_ecpri, frame_ecpri, EcpriHeader, MessageType};
use super::error::{check_width, CodecError, Result};
use super::{read_app_header, write_app_header, CodecContext, DataDirection, RadioTiming};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UplaneSection {
    pub section_id: u16,
    pub rb_flag: bool,
    pub sym_inc: bool,
    pub start_prb: u16,
    pub num_prb: u8,
    pub prbs: Vec<PrbBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UplaneMessage {
    pub header: EcpriHeader,
    pub data_direction: DataDirection,
    pub timing: RadioTiming,
    pub sections: Vec<UplaneSection>,
}

impl UplaneMessage {
    pub fn validate(&self, ctx: &CodecContext) -> Result<()> {
        if self.sections.is_empty() {
            return Err(CodecError::Structure(
                "U-Plane message has no sections".into(),
            ));
        }
        if self.header.message_type != MessageType::IqData {
            return Err(CodecError::Structure(
                "U-Plane message must use IQ_DATA".into(),
            ));
        }
        for s in &self.sections {
            let expected = ctx.effective_num_prb(s.start_prb, s.num_prb)?;
            if s.prbs.len() != expected {
                return Err(CodecError::Structure(format!(
                    "section {} declares {} PRBs but carries {}",
                    s.section_id,
                    expected,
                    s.prbs.len()
                )));
            }
        }
        Ok(())
    }
}

pub fn encode_uplane(msg: &UplaneMessage, ctx: &CodecContext) -> Result<Vec<u8>> {
    msg.validate(ctx)?;
    let mut w = BitWriter::new();
    write_app_header(&mut w, msg.data_direction, &msg.timing)?;
    for s in &msg.sections {
        check_width("section_id", s.section_id as i64, 12)?;
        check_width("start_prb", s.start_prb as i64, 10)?;
        w.put(s.section_id as u64, 12);
        w.put_bool(s.rb_flag);
        w.put_bool(s.sym_inc);
        w.put(s.start_prb as u64, 10);
        w.put(s.num_prb as u64, 8);
        for prb in &s.prbs {
            prb.write(&mut w)?;
        }
    }
    frame_ecpri(msg.header, &w.finish())
}

pub fn decode_uplane(frame: &[u8], ctx: &CodecContext) -> Result<UplaneMessage> {
    let (header, payload) = decode_ecpri(frame, ctx.eaxc_layout)?;
    if header.message_type != MessageType::IqData {
        return Err(CodecError::Structure("not a U-Plane frame".into()));
    }
    let mut r = BitReader::new(payload);
    let (data_direction, timing) = read_app_header(&mut r)?;
    let mut sections = Vec::new();
    while !r.is_empty() {
        let section_id = r.get(12)? as u16;
        let rb_flag = r.get_bool()?;
        let sym_inc = r.get_bool()?;
        let start_prb = r.get(10)? as u16;
        let num_prb = r.get(8)? as u8;
        let count = ctx.effective_num_prb(start_prb, num_prb)?;
        let mut prbs = Vec::with_capacity(count);
        for _ in 0..count {
            prbs.push(PrbBlock::read(&mut r)?);
        }
        sections.push(UplaneSection {
            section_id,
            rb_flag,
            sym_inc,
            start_prb,
            num_prb,
            prbs,
        });
    }
    let msg = UplaneMessage {
        header,
        data_direction,
        timing,
        sections,
    };
    msg.validate(ctx)?;
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{bfp_compress, EaxcId, Iq, PRB_WIRE_LEN};

    fn prb(v: i16) -> PrbBlock {
        bfp_compress(&[Iq::new(v, -v); 12])
    }

    fn message(prbs: Vec<PrbBlock>, num_prb: u8) -> UplaneMessage {
        UplaneMessage {
            header: EcpriHeader::new(MessageType::IqData, EaxcId::default(), 9),
            data_direction: DataDirection::Downlink,
            timing: RadioTiming {
                frame_id: 1,
                subframe_id: 9,
                slot_id: 1,
                symbol_id: 13,
            },
            sections: vec![UplaneSection {
                section_id: 4,
                rb_flag: false,
                sym_inc: false,
                start_prb: 10,
                num_prb,
                prbs,
            }],
        }
    }

    #[test]
    fn round_trip_two_prbs() {
        let ctx = CodecContext::default();
        let msg = message(vec![prb(1000), prb(-7)], 2);
        let bytes = encode_uplane(&msg, &ctx).unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 4 + 2 * PRB_WIRE_LEN);
        let mut decoded = decode_uplane(&bytes, &ctx).unwrap();
        decoded.header.payload_size = 0;
        assert_eq!(decoded, msg);
    }

    #[test]
    fn prb_count_mismatch_is_structural() {
        let ctx = CodecContext::default();
        let msg = message(vec![prb(1)], 2);
        assert!(matches!(
            encode_uplane(&msg, &ctx),
            Err(CodecError::Structure(_))
        ));
    }

    #[test]
    fn zero_num_prb_means_rest_of_carrier() {
        let ctx = CodecContext {
            n_prb: 13,
            ..Default::default()
        };
        let msg = message(vec![prb(3); 3], 0);
        let bytes = encode_uplane(&msg, &ctx).unwrap();
        assert_eq!(
            decode_uplane(&bytes, &ctx).unwrap().sections[0].prbs.len(),
            3
        );
    }

    #[test]
    fn truncated_payload() {
        let ctx = CodecContext::default();
        let bytes = encode_uplane(&message(vec![prb(5), prb(6)], 2), &ctx).unwrap();
        let mut cut = bytes[..bytes.len() - 10].to_vec();
        let size = (cut.len() - 8) as u16;
        cut[2..4].copy_from_slice(&size.to_be_bytes());
        assert!(matches!(
            decode_uplane(&cut, &ctx),
            Err(CodecError::Truncated { .. })
        ));
    }
}
