//! MSB-first bit packing used by the fronthaul message codecs.

use super::error::{CodecError, Result};

#[derive(Debug, Default)]
pub(crate) struct BitWriter {
    buf: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `bits` bits of `value`, most significant first.
    pub fn put(&mut self, value: u64, bits: u32) {
        for i in (0..bits).rev() {
            let bit = (value >> i) & 1;
            if self.bit_len.is_multiple_of(8) {
                self.buf.push(0);
            }
            if bit == 1 {
                let last = self.buf.len() - 1;
                self.buf[last] |= 0x80 >> (self.bit_len % 8);
            }
            self.bit_len += 1;
        }
    }

    pub fn put_signed(&mut self, value: i64, bits: u32) {
        let mask = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        self.put(value as u64 & mask, bits);
    }

    pub fn put_bool(&mut self, value: bool) {
        self.put(value as u64, 1);
    }

    /// Pads with zero bits up to the next byte boundary.
    pub fn align(&mut self) {
        self.bit_len = self.buf.len() * 8;
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.align();
        self.buf
    }
}

#[derive(Debug)]
pub(crate) struct BitReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn get(&mut self, bits: u32) -> Result<u64> {
        let end = self.pos + bits as usize;
        if end > self.buf.len() * 8 {
            return Err(CodecError::Truncated {
                needed: end.div_ceil(8),
                available: self.buf.len(),
            });
        }
        let mut v = 0u64;
        for _ in 0..bits {
            let byte = self.buf[self.pos / 8];
            let bit = (byte >> (7 - (self.pos % 8))) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn get_signed(&mut self, bits: u32) -> Result<i64> {
        let raw = self.get(bits)?;
        let shift = 64 - bits;
        Ok(((raw << shift) as i64) >> shift)
    }

    pub fn get_bool(&mut self) -> Result<bool> {
        Ok(self.get(1)? == 1)
    }

    pub fn align(&mut self) {
        self.pos = self.pos.div_ceil(8) * 8;
    }

    /// Bytes left after aligning to the next byte boundary.
    pub fn remaining_bytes(&self) -> usize {
        self.buf.len() - self.pos.div_ceil(8)
    }

    pub fn is_empty(&self) -> bool {
        self.remaining_bytes() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packs_msb_first_across_bytes() {
        let mut w = BitWriter::new();
        w.put(0b101, 3);
        w.put(0x1F, 5);
        w.put(0x3, 4);
        let bytes = w.finish();
        assert_eq!(bytes, vec![0b1011_1111, 0b0011_0000]);

        let mut r = BitReader::new(&bytes);
        assert_eq!(r.get(3).unwrap(), 0b101);
        assert_eq!(r.get(5).unwrap(), 0x1F);
        assert_eq!(r.get(4).unwrap(), 0x3);
    }

    #[test]
    fn signed_nine_bit_values() {
        let mut w = BitWriter::new();
        for v in [-256i64, -1, 0, 255] {
            w.put_signed(v, 9);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for v in [-256i64, -1, 0, 255] {
            assert_eq!(r.get_signed(9).unwrap(), v);
        }
    }

    #[test]
    fn reading_past_end_is_truncation() {
        let mut r = BitReader::new(&[0xFF]);
        r.get(6).unwrap();
        assert!(matches!(r.get(3), Err(CodecError::Truncated { .. })));
    }
}
