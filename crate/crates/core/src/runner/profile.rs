//! Lab profile: everything about the bench that is not the device.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::testbed::TransportMode;
use crate::codec::EaxcLayout;
use crate::cuplane::DEFAULT_ERROR_THRESHOLD;
use crate::mplane::session::{DEFAULT_SUPERVISION_GUARD_S, DEFAULT_SUPERVISION_INTERVAL_S};
use crate::ru::{FaultPlan, FaultToggle};

/// Which cases see the profile's fault toggles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultScope {
    /// Each toggle applies only to the case it maps to.
    #[default]
    Targeted,
    /// Every toggle applies to every case.
    Global,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSettings {
    #[serde(default)]
    pub scope: FaultScope,
    #[serde(default)]
    pub toggles: Vec<FaultToggle>,
}

impl FaultSettings {
    /// Fault plan for the environment of `case_id`.
    pub fn plan_for(&self, case_id: &str) -> FaultPlan {
        let mut plan = FaultPlan::default();
        for t in &self.toggles {
            if self.scope == FaultScope::Global || t.mapped_case() == case_id {
                plan.set(*t);
            }
        }
        plan
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisionSettings {
    pub interval_s: u64,
    pub guard_s: u64,
}

impl Default for SupervisionSettings {
    fn default() -> Self {
        Self {
            interval_s: DEFAULT_SUPERVISION_INTERVAL_S,
            guard_s: DEFAULT_SUPERVISION_GUARD_S,
        }
    }
}

fn default_name() -> String {
    "default".into()
}

fn default_attenuation() -> f64 {
    30.0
}

fn default_termination() -> f64 {
    50.0
}

fn default_te_limit() -> f64 {
    1_500.0
}

fn default_error_threshold() -> f64 {
    DEFAULT_ERROR_THRESHOLD
}

fn default_parallel() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabProfile {
    #[serde(default = "default_name")]
    pub name: String,
    /// Subtracted from raw time error before limits are applied.
    #[serde(default)]
    pub calibration_offset_ns: f64,
    /// Recorded for report parity; no effect on the simulation.
    #[serde(default = "default_attenuation")]
    pub attenuation_db: f64,
    /// Recorded for report parity; no effect on the simulation.
    #[serde(default = "default_termination")]
    pub termination_ohm: f64,
    #[serde(default)]
    pub supervision: SupervisionSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub transport: TransportMode,
    #[serde(default = "default_te_limit")]
    pub te_limit_ns: f64,
    #[serde(default = "default_error_threshold")]
    pub error_threshold: f64,
    #[serde(default)]
    pub faults: FaultSettings,
    /// eAxC bit partition assumed for the device; the device does not
    /// advertise one, so it is bench configuration.
    #[serde(default)]
    pub eaxc_layout: EaxcLayout,
    /// Run independent cases on several threads.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl Default for LabProfile {
    fn default() -> Self {
        toml::from_str("").expect("empty profile takes every default")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("reading profile {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing profile: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid profile: {0}")]
    Invalid(String),
}

impl LabProfile {
    pub fn from_toml(text: &str) -> Result<Self, ProfileError> {
        let p: LabProfile = toml::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if !self.calibration_offset_ns.is_finite() {
            return Err(ProfileError::Invalid(
                "calibration_offset_ns must be finite".into(),
            ));
        }
        if !(self.te_limit_ns.is_finite() && self.te_limit_ns > 0.0) {
            return Err(ProfileError::Invalid("te_limit_ns must be positive".into()));
        }
        if !(self.error_threshold > 0.0 && self.error_threshold <= 1.0) {
            return Err(ProfileError::Invalid(
                "error_threshold must lie in (0, 1]".into(),
            ));
        }
        self.eaxc_layout
            .validate()
            .map_err(|e| ProfileError::Invalid(format!("eaxc_layout: {e}")))?;
        if self.supervision.interval_s == 0 {
            return Err(ProfileError::Invalid(
                "supervision interval must be non-zero".into(),
            ));
        }
        Ok(())
    }
}
