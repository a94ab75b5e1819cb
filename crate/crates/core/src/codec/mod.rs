//! Bit-exact fronthaul message codecs.
//!
//! Messages ride in eCPRI frames: an 8-byte transport header followed by a
//! C-Plane (real-time control) or U-Plane (IQ data) application payload.
//! All multi-byte fields are big-endian and packed most-significant bit
//! first. IQ data uses static 9-bit block floating point, so no
//! compression header travels on the wire; both ends take the bit width
//! from carrier configuration.

mod bfp;
mod bits;
mod capture;
mod cplane;
mod eaxc;
mod ecpri;
mod error;
mod uplane;

use serde::{Deserialize, Serialize};

pub use bfp::{
    bfp_compress, bfp_decompress, compress_res, Iq, PrbBlock, MANTISSA_MAX, MANTISSA_MIN,
    PRB_WIRE_LEN, RES_PER_PRB,
};
pub use capture::{CaptureDirection, CaptureReader, CaptureRecord, CaptureWriter};
pub use cplane::{
    decode_cplane, encode_cplane, CplaneMessage, CplaneSection, SectionType, St3Fields,
};
pub use eaxc::{pack_eaxc, unpack_eaxc, EaxcId, EaxcLayout};
pub use ecpri::{
    decode_ecpri, encode_ecpri, frame_ecpri, EcpriHeader, MessageType, ECPRI_HEADER_LEN,
};
pub use error::{CodecError, Result};
pub use uplane::{decode_uplane, encode_uplane, UplaneMessage, UplaneSection};

use bits::{BitReader, BitWriter};
use error::check_width;

/// Session-level parameters both endpoints agree on out of band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecContext {
    pub eaxc_layout: EaxcLayout,
    /// Number of RU antenna ports; inline beam weight vectors carry one
    /// weight per port.
    pub ru_ports: usize,
    /// Carrier width in PRBs, used to resolve `num_prb = 0`.
    pub n_prb: u16,
}

impl Default for CodecContext {
    fn default() -> Self {
        Self {
            eaxc_layout: EaxcLayout::default(),
            ru_ports: 32,
            n_prb: 133,
        }
    }
}

impl CodecContext {
    /// PRB count a section actually carries: 0 on the wire means every PRB
    /// from `start_prb` to the carrier edge.
    pub fn effective_num_prb(&self, start_prb: u16, num_prb: u8) -> Result<usize> {
        if num_prb != 0 {
            return Ok(num_prb as usize);
        }
        if start_prb >= self.n_prb {
            return Err(CodecError::Structure(format!(
                "start_prb {start_prb} outside carrier of {} PRBs",
                self.n_prb
            )));
        }
        Ok((self.n_prb - start_prb) as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataDirection {
    Uplink,
    Downlink,
}

/// Radio timing fields shared by C-Plane and U-Plane application headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RadioTiming {
    pub frame_id: u8,
    pub subframe_id: u8,
    pub slot_id: u8,
    /// Start symbol for C-Plane, symbol for U-Plane.
    pub symbol_id: u8,
}

const PAYLOAD_VERSION: u64 = 1;

fn write_app_header(w: &mut BitWriter, dir: DataDirection, t: &RadioTiming) -> Result<()> {
    check_width("subframe_id", t.subframe_id as i64, 4)?;
    check_width("slot_id", t.slot_id as i64, 6)?;
    check_width("symbol_id", t.symbol_id as i64, 6)?;
    w.put_bool(dir == DataDirection::Downlink);
    w.put(PAYLOAD_VERSION, 3);
    w.put(0, 4); // filter index
    w.put(t.frame_id as u64, 8);
    w.put(t.subframe_id as u64, 4);
    w.put(t.slot_id as u64, 6);
    w.put(t.symbol_id as u64, 6);
    Ok(())
}

fn read_app_header(r: &mut BitReader<'_>) -> Result<(DataDirection, RadioTiming)> {
    let dir = if r.get_bool()? {
        DataDirection::Downlink
    } else {
        DataDirection::Uplink
    };
    let version = r.get(3)?;
    if version != PAYLOAD_VERSION {
        return Err(CodecError::Structure(format!("payload version {version}")));
    }
    if r.get(4)? != 0 {
        return Err(CodecError::ReservedBits("filter index"));
    }
    let timing = RadioTiming {
        frame_id: r.get(8)? as u8,
        subframe_id: r.get(4)? as u8,
        slot_id: r.get(6)? as u8,
        symbol_id: r.get(6)? as u8,
    };
    Ok((dir, timing))
}
