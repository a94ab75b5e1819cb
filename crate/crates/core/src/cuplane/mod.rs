//! CU-Plane stimulus and measurement: PN23-seeded resource grids, timed
//! C/U-Plane flows, the virtual RF front end, and analyzer checks.

pub mod analyzer;
pub mod beam;
pub mod carrier;
pub mod dlm;
pub mod error;
pub mod flow;
pub mod grid;
pub mod pn23;
pub mod rf;
pub mod zc;

pub use analyzer::{
    analyze_dl_output, analyze_prach, analyze_ul_output, normalized_error, reassemble_uplane,
    MeasurementResult, PrachResult, Verdict, DEFAULT_ERROR_THRESHOLD, PRACH_PEAK_THRESHOLD,
};
pub use beam::{
    detect_beam_direction, steering_weights, BeamEntry, BeamTable, BeamTableDocument,
    NO_BEAMFORMING,
};
pub use carrier::{CarrierConfig, SlotKind, TddPattern, SYMBOLS_PER_SLOT};
pub use dlm::{dlm_advances, evaluate_dlm, Arrival, Counters, DelayWindow, DlmStimulus, Plane};
pub use error::CuError;
pub use flow::{
    build_dl_flow, build_prach_st3_flow, build_ul_flow, prach_injection, BeamSpec, FlowContext,
    PrachConfig, TimedMessage,
};
pub use grid::{
    generate_grid, section_prbs, Allocation, Modulation, ResourceGrid, WaveformSpec, DEFAULT_RMS,
};
pub use pn23::{pn23_bits, Pn23};
pub use rf::{AppliedBeam, Emission, VirtualRf};
pub use zc::{normalized_correlation, zadoff_chu};
