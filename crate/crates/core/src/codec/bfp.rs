//! Static block floating point compression, 9-bit mantissas.
//!
//! One PRB (12 resource elements, 24 real components) shares a 4-bit
//! exponent. Compression is an arithmetic right shift, so the rounding rule
//! is truncation toward negative infinity.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::bits::{BitReader, BitWriter};
use super::error::{CodecError, Result};

pub type Iq = Complex<i16>;

pub const RES_PER_PRB: usize = 12;
pub const MANTISSA_BITS: u32 = 9;
pub const MANTISSA_MIN: i16 = -256;
pub const MANTISSA_MAX: i16 = 255;
/// One exponent byte plus 24 nine-bit mantissas.
pub const PRB_WIRE_LEN: usize = 1 + (RES_PER_PRB * 2 * MANTISSA_BITS as usize) / 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrbBlock {
    pub exponent: u8,
    pub mantissas: [Iq; RES_PER_PRB],
}

impl PrbBlock {
    pub fn validate(&self) -> Result<()> {
        if self.exponent > 15 {
            return Err(CodecError::FieldOverflow {
                field: "exponent",
                value: self.exponent as i64,
                bits: 4,
            });
        }
        for m in &self.mantissas {
            for c in [m.re, m.im] {
                if !(MANTISSA_MIN..=MANTISSA_MAX).contains(&c) {
                    return Err(CodecError::FieldOverflow {
                        field: "mantissa",
                        value: c as i64,
                        bits: MANTISSA_BITS,
                    });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn write(&self, w: &mut BitWriter) -> Result<()> {
        self.validate()?;
        w.put(self.exponent as u64, 8);
        for m in &self.mantissas {
            w.put_signed(m.re as i64, MANTISSA_BITS);
            w.put_signed(m.im as i64, MANTISSA_BITS);
        }
        w.align();
        Ok(())
    }

    pub(crate) fn read(r: &mut BitReader<'_>) -> Result<Self> {
        let param = r.get(8)? as u8;
        if param & 0xF0 != 0 {
            return Err(CodecError::ReservedBits("udCompParam"));
        }
        let mut mantissas = [Iq::new(0, 0); RES_PER_PRB];
        for m in mantissas.iter_mut() {
            let re = r.get_signed(MANTISSA_BITS)? as i16;
            let im = r.get_signed(MANTISSA_BITS)? as i16;
            *m = Iq::new(re, im);
        }
        r.align();
        Ok(Self {
            exponent: param,
            mantissas,
        })
    }
}

fn fits(component: i16, exponent: u8) -> bool {
    let shifted = component >> exponent;
    (MANTISSA_MIN..=MANTISSA_MAX).contains(&shifted)
}

pub fn bfp_compress(samples: &[Iq; RES_PER_PRB]) -> PrbBlock {
    let exponent = (0u8..=15)
        .find(|&e| samples.iter().all(|s| fits(s.re, e) && fits(s.im, e)))
        .expect("any i16 fits after a shift of 7");
    let mut mantissas = [Iq::new(0, 0); RES_PER_PRB];
    for (m, s) in mantissas.iter_mut().zip(samples) {
        *m = Iq::new(s.re >> exponent, s.im >> exponent);
    }
    PrbBlock {
        exponent,
        mantissas,
    }
}

pub fn bfp_decompress(block: &PrbBlock) -> [Iq; RES_PER_PRB] {
    let mut out = [Iq::new(0, 0); RES_PER_PRB];
    for (o, m) in out.iter_mut().zip(&block.mantissas) {
        let re = (m.re as i32) << block.exponent;
        let im = (m.im as i32) << block.exponent;
        *o = Iq::new(saturate(re), saturate(im));
    }
    out
}

fn saturate(v: i32) -> i16 {
    v.clamp(i16::MIN as i32, i16::MAX as i32) as i16
}

/// Compresses an arbitrary-length RE sequence, zero-padding the last PRB.
pub fn compress_res(res: &[Iq]) -> Vec<PrbBlock> {
    res.chunks(RES_PER_PRB)
        .map(|chunk| {
            let mut block = [Iq::new(0, 0); RES_PER_PRB];
            block[..chunk.len()].copy_from_slice(chunk);
            bfp_compress(&block)
        })
        .collect()
}
