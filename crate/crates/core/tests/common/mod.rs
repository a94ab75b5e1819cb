//! Shared strategies and helpers for the integration and acceptance targets.
#![allow(dead_code)]

use proptest::collection::vec;
use proptest::prelude::*;

use ofh_conformance::codec::{
    CodecContext, CplaneMessage, CplaneSection, DataDirection, EaxcId, EaxcLayout, EcpriHeader, Iq,
    MessageType, PrbBlock, RadioTiming, SectionType, St3Fields, UplaneMessage, UplaneSection,
    MANTISSA_MAX, MANTISSA_MIN, RES_PER_PRB,
};

pub fn ctx() -> CodecContext {
    CodecContext::default()
}

pub fn eaxc() -> impl Strategy<Value = EaxcId> {
    (0u16..16, 0u16..16, 0u16..16, 0u16..16)
        .prop_map(|(d, b, c, r)| EaxcId::new(d, b, c, r, EaxcLayout::default()))
}

pub fn header(kind: MessageType) -> impl Strategy<Value = EcpriHeader> {
    (0u8..16, eaxc(), any::<u8>(), any::<bool>(), 0u8..128).prop_map(
        move |(rev, eaxc, seq, e, sub)| EcpriHeader {
            protocol_revision: rev,
            concatenation: false,
            message_type: kind,
            payload_size: 0,
            eaxc,
            sequence_id: seq,
            e_bit: e,
            subsequence_id: sub,
        },
    )
}

pub fn timing() -> impl Strategy<Value = RadioTiming> {
    (any::<u8>(), 0u8..16, 0u8..64, 0u8..64).prop_map(|(f, sf, sl, sy)| RadioTiming {
        frame_id: f,
        subframe_id: sf,
        slot_id: sl,
        symbol_id: sy,
    })
}

pub fn direction() -> impl Strategy<Value = DataDirection> {
    prop_oneof![Just(DataDirection::Uplink), Just(DataDirection::Downlink)]
}

pub fn iq(lo: i16, hi: i16) -> impl Strategy<Value = Iq> {
    (lo..=hi, lo..=hi).prop_map(|(re, im)| Iq::new(re, im))
}

pub fn cplane_section(ru_ports: usize) -> impl Strategy<Value = CplaneSection> {
    (
        (
            0u16..4096,
            any::<bool>(),
            any::<bool>(),
            0u16..1024,
            any::<u8>(),
        ),
        (0u16..4096, 0u8..16, 0u16..32768),
        proptest::option::of(vec(iq(i16::MIN, i16::MAX), ru_ports)),
    )
        .prop_map(
            |((id, rb, si, start, num), (mask, nsym, beam), w)| CplaneSection {
                section_id: id,
                rb_flag: rb,
                sym_inc: si,
                start_prb: start,
                num_prb: num,
                re_mask: mask,
                num_symbol: nsym,
                beam_id: beam,
                beam_weights: w,
            },
        )
}

pub fn st3_fields() -> impl Strategy<Value = St3Fields> {
    (
        any::<u16>(),
        any::<u8>(),
        any::<u16>(),
        -(1i32 << 23)..(1i32 << 23),
    )
        .prop_map(|(t, fs, cp, fo)| St3Fields {
            time_offset: t,
            frame_structure: fs,
            cp_length: cp,
            freq_offset: fo,
        })
}

pub fn cplane_message() -> impl Strategy<Value = CplaneMessage> {
    let ports = ctx().ru_ports;
    (
        header(MessageType::RtControl),
        direction(),
        timing(),
        proptest::option::of(st3_fields()),
        vec(cplane_section(ports), 1..5),
    )
        .prop_map(
            |(header, data_direction, timing, st3, sections)| CplaneMessage {
                header,
                data_direction,
                timing,
                section_type: if st3.is_some() {
                    SectionType::St3
                } else {
                    SectionType::St1
                },
                st3,
                sections,
            },
        )
}

pub fn prb_block() -> impl Strategy<Value = PrbBlock> {
    (
        0u8..16,
        proptest::array::uniform12(iq(MANTISSA_MIN, MANTISSA_MAX)),
    )
        .prop_map(|(exponent, mantissas)| PrbBlock {
            exponent,
            mantissas,
        })
}

/// Either an explicit PRB count, or 0 (rest of carrier) from near the edge.
pub fn uplane_section() -> impl Strategy<Value = UplaneSection> {
    let n_prb = ctx().n_prb;
    let explicit = (0u16..1024, 1u8..9)
        .prop_flat_map(|(start, num)| (Just(start), Just(num), vec(prb_block(), num as usize)));
    let rest = (n_prb - 4..n_prb).prop_flat_map(move |start| {
        (
            Just(start),
            Just(0u8),
            vec(prb_block(), (n_prb - start) as usize),
        )
    });
    (
        0u16..4096,
        any::<bool>(),
        any::<bool>(),
        prop_oneof![4 => explicit, 1 => rest],
    )
        .prop_map(|(id, rb, si, (start, num, prbs))| UplaneSection {
            section_id: id,
            rb_flag: rb,
            sym_inc: si,
            start_prb: start,
            num_prb: num,
            prbs,
        })
}

pub fn uplane_message() -> impl Strategy<Value = UplaneMessage> {
    (
        header(MessageType::IqData),
        direction(),
        timing(),
        vec(uplane_section(), 1..4),
    )
        .prop_map(|(header, data_direction, timing, sections)| UplaneMessage {
            header,
            data_direction,
            timing,
            sections,
        })
}

pub fn iq_block() -> impl Strategy<Value = [Iq; RES_PER_PRB]> {
    // Mix full-scale blocks with small ones so every exponent occurs.
    (0u32..16).prop_flat_map(|bits| {
        let hi = ((1i32 << bits) - 1).min(i16::MAX as i32) as i16;
        let lo = (-(1i32 << bits)).max(i16::MIN as i32) as i16;
        proptest::array::uniform12(iq(lo, hi))
    })
}

/// Independent BFP reference: the smallest shift putting every component
/// into the signed 9-bit mantissa range.
pub fn oracle_exponent(block: &[Iq; RES_PER_PRB]) -> u8 {
    let peak = block
        .iter()
        .flat_map(|c| [c.re as i32, c.im as i32])
        .map(|v| if v < 0 { -v - 1 } else { v })
        .max()
        .unwrap_or(0);
    let mut e = 0u8;
    while (peak >> e) > 255 {
        e += 1;
    }
    e
}

pub fn ids(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}
