//! eCPRI common header plus the O-RAN transport fields (eAxC, sequence ids).
//!
//! Wire layout, 8 bytes, big-endian:
//!
//! ```text
//! byte 0    revision(4) | reserved(3) | concatenation(1)
//! byte 1    message type (0 = IQ data, 2 = real-time control)
//! byte 2-3  payload size in bytes
//! byte 4-5  packed eAxC id
//! byte 6    sequence id
//! byte 7    E bit(1) | subsequence id(7)
//! ```

use serde::{Deserialize, Serialize};

use super::eaxc::{pack_eaxc, unpack_eaxc, EaxcId, EaxcLayout};
use super::error::{check_width, CodecError, Result};

pub const ECPRI_HEADER_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageType {
    IqData,
    RtControl,
}

impl MessageType {
    pub fn wire_value(self) -> u8 {
        match self {
            MessageType::IqData => 0,
            MessageType::RtControl => 2,
        }
    }

    pub fn from_wire(value: u8) -> Result<Self> {
        match value {
            0 => Ok(MessageType::IqData),
            2 => Ok(MessageType::RtControl),
            other => Err(CodecError::UnknownMessageType(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcpriHeader {
    pub protocol_revision: u8,
    pub concatenation: bool,
    pub message_type: MessageType,
    pub payload_size: u16,
    pub eaxc: EaxcId,
    pub sequence_id: u8,
    pub e_bit: bool,
    pub subsequence_id: u8,
}

impl EcpriHeader {
    /// Revision 1, no concatenation, single-fragment message.
    pub fn new(message_type: MessageType, eaxc: EaxcId, sequence_id: u8) -> Self {
        Self {
            protocol_revision: 1,
            concatenation: false,
            message_type,
            payload_size: 0,
            eaxc,
            sequence_id,
            e_bit: true,
            subsequence_id: 0,
        }
    }
}

pub fn encode_ecpri(header: &EcpriHeader, payload: &[u8]) -> Result<Vec<u8>> {
    if payload.len() > u16::MAX as usize {
        return Err(CodecError::PayloadTooLarge(payload.len()));
    }
    if header.payload_size as usize != payload.len() {
        return Err(CodecError::PayloadSizeMismatch {
            declared: header.payload_size as usize,
            actual: payload.len(),
        });
    }
    check_width("protocol_revision", header.protocol_revision as i64, 4)?;
    check_width("subsequence_id", header.subsequence_id as i64, 7)?;
    let eaxc = pack_eaxc(&header.eaxc)?;

    let mut out = Vec::with_capacity(ECPRI_HEADER_LEN + payload.len());
    out.push(header.protocol_revision << 4 | header.concatenation as u8);
    out.push(header.message_type.wire_value());
    out.extend_from_slice(&header.payload_size.to_be_bytes());
    out.extend_from_slice(&eaxc.to_be_bytes());
    out.push(header.sequence_id);
    out.push((header.e_bit as u8) << 7 | header.subsequence_id);
    out.extend_from_slice(payload);
    Ok(out)
}

/// Like [`encode_ecpri`] but fills `payload_size` from the payload.
pub fn frame_ecpri(mut header: EcpriHeader, payload: &[u8]) -> Result<Vec<u8>> {
    header.payload_size =
        u16::try_from(payload.len()).map_err(|_| CodecError::PayloadTooLarge(payload.len()))?;
    encode_ecpri(&header, payload)
}

pub fn decode_ecpri(bytes: &[u8], layout: EaxcLayout) -> Result<(EcpriHeader, &[u8])> {
    if bytes.len() < ECPRI_HEADER_LEN {
        return Err(CodecError::Truncated {
            needed: ECPRI_HEADER_LEN,
            available: bytes.len(),
        });
    }
    if bytes[0] & 0x0E != 0 {
        return Err(CodecError::ReservedBits("eCPRI byte 0"));
    }
    let message_type = MessageType::from_wire(bytes[1])?;
    let payload_size = u16::from_be_bytes([bytes[2], bytes[3]]);
    let eaxc = unpack_eaxc(u16::from_be_bytes([bytes[4], bytes[5]]), layout)?;
    let body = &bytes[ECPRI_HEADER_LEN..];
    let declared = payload_size as usize;
    if body.len() < declared {
        return Err(CodecError::Truncated {
            needed: ECPRI_HEADER_LEN + declared,
            available: bytes.len(),
        });
    }
    if body.len() > declared {
        return Err(CodecError::TrailingBytes(body.len() - declared));
    }
    let header = EcpriHeader {
        protocol_revision: bytes[0] >> 4,
        concatenation: bytes[0] & 1 == 1,
        message_type,
        payload_size,
        eaxc,
        sequence_id: bytes[6],
        e_bit: bytes[7] & 0x80 != 0,
        subsequence_id: bytes[7] & 0x7F,
    };
    Ok((header, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_eaxc() -> EaxcId {
        EaxcId::default()
    }

    #[test]
    fn empty_iq_data_frame() {
        let h = EcpriHeader::new(MessageType::IqData, zero_eaxc(), 0);
        let bytes = encode_ecpri(&h, &[]).unwrap();
        assert_eq!(bytes, [0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80]);
        let (decoded, payload) = decode_ecpri(&bytes, EaxcLayout::default()).unwrap();
        assert_eq!(decoded, h);
        assert!(payload.is_empty());
    }

    #[test]
    fn rt_control_with_payload() {
        let eaxc = unpack_eaxc(0x0001, EaxcLayout::default()).unwrap();
        let mut h = EcpriHeader::new(MessageType::RtControl, eaxc, 0x05);
        h.payload_size = 4;
        let bytes = encode_ecpri(&h, &[0xAA, 0xBB, 0xCC, 0xDD]).unwrap();
        assert_eq!(
            bytes,
            [0x10, 0x02, 0x00, 0x04, 0x00, 0x01, 0x05, 0x80, 0xAA, 0xBB, 0xCC, 0xDD]
        );
    }

    #[test]
    fn seven_bytes_is_truncated() {
        let err = decode_ecpri(&[0x10, 0, 0, 0, 0, 0, 0], EaxcLayout::default()).unwrap_err();
        assert!(matches!(err, CodecError::Truncated { .. }));
    }

    #[test]
    fn unknown_message_type() {
        let err =
            decode_ecpri(&[0x10, 0x07, 0, 0, 0, 0, 0, 0x80], EaxcLayout::default()).unwrap_err();
        assert_eq!(err, CodecError::UnknownMessageType(0x07));
    }

    #[test]
    fn size_mismatches_are_rejected() {
        let short = [0x10, 0x00, 0x00, 0x02, 0, 0, 0, 0x80, 0xAA];
        assert!(matches!(
            decode_ecpri(&short, EaxcLayout::default()),
            Err(CodecError::Truncated { .. })
        ));
        let long = [0x10, 0x00, 0x00, 0x00, 0, 0, 0, 0x80, 0xAA];
        assert_eq!(
            decode_ecpri(&long, EaxcLayout::default()),
            Err(CodecError::TrailingBytes(1))
        );

        let h = EcpriHeader::new(MessageType::IqData, zero_eaxc(), 0);
        assert!(matches!(
            encode_ecpri(&h, &[1, 2]),
            Err(CodecError::PayloadSizeMismatch { .. })
        ));
    }

    #[test]
    fn oversized_payload() {
        let payload = vec![0u8; 70_000];
        let h = EcpriHeader::new(MessageType::IqData, zero_eaxc(), 0);
        assert_eq!(
            encode_ecpri(&h, &payload),
            Err(CodecError::PayloadTooLarge(70_000))
        );
        assert_eq!(
            frame_ecpri(h, &payload),
            Err(CodecError::PayloadTooLarge(70_000))
        );
    }

    proptest! {
        #[test]
        fn round_trip(rev in 0u8..16, concat in any::<bool>(), rt in any::<bool>(),
                      eaxc_raw in any::<u16>(), seq in any::<u8>(), e in any::<bool>(),
                      sub in 0u8..128, payload in proptest::collection::vec(any::<u8>(), 0..64)) {
            let layout = EaxcLayout::default();
            let h = EcpriHeader {
                protocol_revision: rev,
                concatenation: concat,
                message_type: if rt { MessageType::RtControl } else { MessageType::IqData },
                payload_size: payload.len() as u16,
                eaxc: unpack_eaxc(eaxc_raw, layout).unwrap(),
                sequence_id: seq,
                e_bit: e,
                subsequence_id: sub,
            };
            let bytes = encode_ecpri(&h, &payload).unwrap();
            let (h2, p2) = decode_ecpri(&bytes, layout).unwrap();
            prop_assert_eq!(h2, h);
            prop_assert_eq!(p2, &payload[..]);
        }
    }
}
