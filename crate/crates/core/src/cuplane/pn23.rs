//! PN23 payload generator: Fibonacci LFSR for x^23 + x^18 + 1.

use super::error::CuError;

const MASK: u32 = (1 << 23) - 1;

/// Register bits are numbered 1..=23; bit 23 is the most significant and
/// is the output. The feedback bit (bit 23 xor bit 18) shifts in at bit 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pn23 {
    state: u32,
}

impl Pn23 {
    pub fn new(seed: u32) -> Result<Self, CuError> {
        let state = seed & MASK;
        if state == 0 {
            return Err(CuError::ZeroSeed);
        }
        Ok(Self { state })
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_bit(&mut self) -> u8 {
        let out = (self.state >> 22) & 1;
        let fb = out ^ ((self.state >> 17) & 1);
        self.state = ((self.state << 1) | fb) & MASK;
        out as u8
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.next_bit()).collect()
    }
}

pub fn pn23_bits(seed: u32, n: usize) -> Result<Vec<u8>, CuError> {
    Ok(Pn23::new(seed)?.bits(n))
}
