use thiserror::Error;

use crate::codec::CodecError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CuError {
    #[error("PN23 seed must be non-zero in its low 23 bits")]
    ZeroSeed,
    #[error("allocation out of range: {0}")]
    AllocationOutOfRange(String),
    #[error("carrier is not active")]
    InactiveCarrier,
    #[error("slot {slot} carries no {wanted} symbols in the TDD pattern")]
    WrongSlotDirection { slot: u64, wanted: &'static str },
    #[error("invalid carrier configuration: {0}")]
    InvalidCarrier(String),
    #[error("beam table: {0}")]
    BeamTable(String),
    #[error("invalid delay window: {0}")]
    InvalidWindow(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}
