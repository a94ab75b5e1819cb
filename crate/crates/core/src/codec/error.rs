use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("field `{field}` value {value} does not fit in {bits} bits")]
    FieldOverflow {
        field: &'static str,
        value: i64,
        bits: u32,
    },
    #[error("eAxC layout widths sum to {0}, expected 16")]
    InvalidLayout(u32),
    #[error("buffer truncated: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },
    #[error("payload of {0} bytes exceeds the 16-bit eCPRI payload size")]
    PayloadTooLarge(usize),
    #[error("header payload_size {declared} does not match payload length {actual}")]
    PayloadSizeMismatch { declared: usize, actual: usize },
    #[error("{0} trailing bytes after declared payload")]
    TrailingBytes(usize),
    #[error("unknown eCPRI message type 0x{0:02x}")]
    UnknownMessageType(u8),
    #[error("unsupported section type {0}")]
    UnsupportedSectionType(u8),
    #[error("reserved bits set in {0}")]
    ReservedBits(&'static str),
    #[error("structural error: {0}")]
    Structure(String),
}

pub type Result<T, E = CodecError> = std::result::Result<T, E>;

pub(crate) fn check_width(field: &'static str, value: i64, bits: u32) -> Result<()> {
    if value < 0 || (bits < 63 && value >= (1i64 << bits)) {
        return Err(CodecError::FieldOverflow { field, value, bits });
    }
    Ok(())
}

pub(crate) fn check_signed_width(field: &'static str, value: i64, bits: u32) -> Result<()> {
    let min = -(1i64 << (bits - 1));
    let max = (1i64 << (bits - 1)) - 1;
    if value < min || value > max {
        return Err(CodecError::FieldOverflow { field, value, bits });
    }
    Ok(())
}
