//! Reference O-RU emulator: the device under test for the hermetic harness.

pub mod emulator;
pub mod faults;
pub mod fronthaul;
pub mod vendor;

use thiserror::Error;

use crate::codec::CodecError;
use crate::cuplane::CuError;

pub use emulator::{
    ActionKind, OruEmulator, RuAction, RuConfig, RuEnvironment, RuPhase, DEFAULT_RU_CERTIFICATE,
    DEFAULT_SOFTWARE_BUILD, DEFAULT_TER_CERTIFICATE,
};
pub use faults::{
    FaultPlan, FaultToggle, UnknownToggle, DEFAULT_INJECTED_FAULT_ID, DEFAULT_REJECTED_NODE,
};
pub use fronthaul::FronthaulCounters;
pub use vendor::{ActivationStep, VendorActivation};

#[derive(Debug, Error)]
pub enum RuError {
    #[error("invalid emulator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Carrier(#[from] CuError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}
