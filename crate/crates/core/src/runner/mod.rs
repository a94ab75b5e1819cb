//! Conformance runner: catalog, lab profile, testbed and case scenarios.

pub mod campaign;
pub mod catalog;
pub mod profile;
pub mod report;
pub mod scenarios;
pub mod testbed;

pub use campaign::{output_root, run_campaign, write_run, Campaign, DEFAULT_OUT, OUT_ENV};
pub use catalog::{
    find, load_catalog, select, Category, Expectation, Plane, SelectionError, TestCase, Verdict,
    CATALOG,
};
pub use profile::{FaultScope, FaultSettings, LabProfile, ProfileError, SupervisionSettings};
pub use report::{
    render_report, CaseRecord, ReportBody, ReportError, ReportFormat, RunMeta, Summary, TestReport,
};
pub use scenarios::{execute, Blocked, CaseOutcome, Check, Evidence};
pub use testbed::{Testbed, TestbedConfig, TestbedError, TransportMode};
