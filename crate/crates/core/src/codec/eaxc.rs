use serde::{Deserialize, Serialize};

use super::error::{check_width, CodecError, Result};

/// Bit-width partitioning of the 16-bit eAxC identifier.
///
/// Fields are concatenated most-significant first: DU port, band sector,
/// component carrier, RU port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EaxcLayout {
    pub du_port_bits: u8,
    pub band_sector_bits: u8,
    pub cc_bits: u8,
    pub ru_port_bits: u8,
}

impl Default for EaxcLayout {
    fn default() -> Self {
        Self::new(4, 4, 4, 4).expect("default layout is valid")
    }
}

impl EaxcLayout {
    pub fn new(
        du_port_bits: u8,
        band_sector_bits: u8,
        cc_bits: u8,
        ru_port_bits: u8,
    ) -> Result<Self> {
        let layout = Self {
            du_port_bits,
            band_sector_bits,
            cc_bits,
            ru_port_bits,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.du_port_bits as u32
            + self.band_sector_bits as u32
            + self.cc_bits as u32
            + self.ru_port_bits as u32;
        if total != 16 {
            return Err(CodecError::InvalidLayout(total));
        }
        Ok(())
    }

    fn widths(&self) -> [u32; 4] {
        [
            self.du_port_bits as u32,
            self.band_sector_bits as u32,
            self.cc_bits as u32,
            self.ru_port_bits as u32,
        ]
    }
}

/// One spatial stream identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EaxcId {
    pub du_port_id: u16,
    pub band_sector_id: u16,
    pub cc_id: u16,
    pub ru_port_id: u16,
    pub layout: EaxcLayout,
}

impl EaxcId {
    pub fn new(
        du_port_id: u16,
        band_sector_id: u16,
        cc_id: u16,
        ru_port_id: u16,
        layout: EaxcLayout,
    ) -> Self {
        Self {
            du_port_id,
            band_sector_id,
            cc_id,
            ru_port_id,
            layout,
        }
    }
}

const FIELD_NAMES: [&str; 4] = ["du_port_id", "band_sector_id", "cc_id", "ru_port_id"];

pub fn pack_eaxc(eaxc: &EaxcId) -> Result<u16> {
    eaxc.layout.validate()?;
    let values = [
        eaxc.du_port_id,
        eaxc.band_sector_id,
        eaxc.cc_id,
        eaxc.ru_port_id,
    ];
    let mut packed: u32 = 0;
    for ((value, bits), name) in values.iter().zip(eaxc.layout.widths()).zip(FIELD_NAMES) {
        check_width(name, *value as i64, bits)?;
        packed = (packed << bits) | *value as u32;
    }
    Ok(packed as u16)
}

pub fn unpack_eaxc(value: u16, layout: EaxcLayout) -> Result<EaxcId> {
    layout.validate()?;
    let mut fields = [0u16; 4];
    let mut shift = 16u32;
    for (slot, bits) in fields.iter_mut().zip(layout.widths()) {
        shift -= bits;
        let mask = if bits == 0 { 0 } else { (1u32 << bits) - 1 };
        *slot = ((value as u32 >> shift) & mask) as u16;
    }
    Ok(EaxcId::new(
        fields[0], fields[1], fields[2], fields[3], layout,
    ))
}
