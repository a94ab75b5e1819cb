//! Synchronization plane: simulated PTP over LLS-C1/C2/C3, clock servo,
//! lock reporting, and time-error measurement.

pub mod bmca;
pub mod clock;
pub mod ptp;
pub mod scenario;
pub mod servo;

pub use bmca::{bmca_select, AnnounceRecord};
pub use clock::{SimClock, SimClockConfig};
pub use ptp::{
    ptp_exchange, ExchangeResult, HopModel, PathModel, PtpFlow, PtpProfileConfig, PtpSlave,
    PtpStats, Topology,
};
pub use scenario::{
    run_functional_test, run_performance_test, FunctionalConfig, FunctionalOutcome,
    PerformanceConfig, PerformanceOutcome, PtpLinkBed, SyncTestbed, SyncVerdict, TeSample,
    TimeErrorSeries,
};
pub use servo::{Servo, ServoConfig, SyncState};
