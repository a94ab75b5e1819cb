//! Hermetic conformance harness for the O-RAN open fronthaul interface.
//!
//! The crate contains both sides of the interface: the test equipment (a DU
//! emulator with a virtual signal analyzer and generator) and a reference
//! O-RU emulator, plus the runner that executes the conformance catalog on a
//! simulated timeline and writes standardized reports.

pub mod codec;
pub mod cuplane;
pub mod mplane;
pub mod ru;
pub mod runner;
pub mod sim;
pub mod splane;
