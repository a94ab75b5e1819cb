//! The conformance catalog: every case executed, in report order.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    M,
    C,
    U,
    S,
    CU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Mandatory,
    ConditionalMandatory,
}

/// Whether the case passes by observing the behavior or its refusal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Blocked,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Blocked => "BLOCKED",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TestCase {
    pub id: &'static str,
    pub title: &'static str,
    pub plane: Plane,
    pub category: Category,
    pub expected: Expectation,
}

impl TestCase {
    /// Establishes the management session itself; its failure blocks the
    /// fronthaul and sync cases.
    pub fn is_session_gate(&self) -> bool {
        self.id == SESSION_GATE
    }

    /// Needs an established management session before anything is observable.
    pub fn needs_session(&self) -> bool {
        self.id != "3.1.1.8"
    }
}

pub const SESSION_GATE: &str = "3.1.1.7";

const fn case(
    id: &'static str,
    title: &'static str,
    plane: Plane,
    category: Category,
    expected: Expectation,
) -> TestCase {
    TestCase {
        id,
        title,
        plane,
        category,
        expected,
    }
}

use Category::{ConditionalMandatory as CM, Mandatory as MA};
use Expectation::{Negative as NEG, Positive as POS};

pub const CATALOG: [TestCase; 31] = [
    case(
        "3.1.1.7",
        "Transport and Handshake in IPv6 Environment (positive case)",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.1.8",
        "Transport and Handshake in IPv6 Environment (negative case)",
        Plane::M,
        MA,
        NEG,
    ),
    case(
        "3.1.2.1",
        "Subscription to Notifications",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.3.1",
        "M-Plane Connection Supervision (positive case)",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.3.2",
        "M-Plane Connection Supervision (negative case)",
        Plane::M,
        MA,
        NEG,
    ),
    case(
        "3.1.4.1",
        "Retrieval without Filter Applied",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.4.2",
        "Retrieval with Filter Applied",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.5.1",
        "O-RU Alarm Notification Generation",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.5.2",
        "Retrieval of Active Alarm List",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.6.1",
        "O-RU Software Update (positive case)",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.6.2",
        "O-RU Software Update (negative case)",
        Plane::M,
        MA,
        NEG,
    ),
    case(
        "3.1.7.1",
        "Software Activation without Reset",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.7.2",
        "Supplemental Reset after Software Activation",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.8.6",
        "Sudo on Hierarchical M-plane architecture (positive case)",
        Plane::M,
        CM,
        POS,
    ),
    case(
        "3.1.10.1",
        "O-RU configurability test (positive case)",
        Plane::M,
        MA,
        POS,
    ),
    case(
        "3.1.10.2",
        "O-RU configurability test (negative case)",
        Plane::M,
        MA,
        NEG,
    ),
    case("3.1.12.1", "Troubleshooting Test", Plane::M, MA, POS),
    case("3.1.12.2", "Trace Test", Plane::M, MA, POS),
    case(
        "3.2.5.1.1",
        "UC-Plane O-RU Scenario Class Base 3GPP DL/UL",
        Plane::CU,
        MA,
        POS,
    ),
    case(
        "3.2.5.1.2",
        "UC-Plane O-RU Scenario Class Extended 3GPP DL/UL - Resource Allocation",
        Plane::CU,
        MA,
        POS,
    ),
    case(
        "3.2.5.1.3",
        "UC-Plane O-RU Scenario Class Extended using RB parameter 3GPP DL/UL - Resource Allocation",
        Plane::CU,
        MA,
        POS,
    ),
    case(
        "3.2.5.2.1",
        "UC-Plane O-RU Scenario Class Beamforming 3GPP DL - No Beamforming",
        Plane::CU,
        CM,
        POS,
    ),
    case(
        "3.2.5.2.2",
        "UC-Plane O-RU Scenario Class Beamforming 3GPP UL - No Beamforming",
        Plane::CU,
        CM,
        POS,
    ),
    case(
        "3.2.5.2.5",
        "UC-Plane O-RU Scenario Class Beamforming 3GPP DL - Weight-based Dynamic Beamforming",
        Plane::CU,
        CM,
        POS,
    ),
    case(
        "3.2.5.4.1",
        "UC-Plane O-RU Scenario Class DLM Test #1: Downlink - Positive testing",
        Plane::CU,
        MA,
        POS,
    ),
    case(
        "3.2.5.4.2",
        "UC-Plane O-RU Scenario Class DLM Test #2: Uplink - Positive testing",
        Plane::CU,
        MA,
        POS,
    ),
    case(
        "3.2.5.4.3",
        "UC-Plane O-RU Scenario Class DLM Test #3: Downlink - Negative testing",
        Plane::CU,
        MA,
        NEG,
    ),
    case(
        "3.2.5.4.4",
        "UC-Plane O-RU Scenario Class DLM Test #4: Uplink - Negative Testing",
        Plane::CU,
        MA,
        NEG,
    ),
    case(
        "3.2.5.8.1",
        "UC-Plane O-RU Scenario Class ST3 Test #1: NR PRACH",
        Plane::CU,
        CM,
        POS,
    ),
    case(
        "3.3.2",
        "Functional test of O-RU using ITU-T G.8275.1 Profile (LLS-C1/C2/C3)",
        Plane::S,
        MA,
        POS,
    ),
    case(
        "3.3.3",
        "Performance test of O-RU using ITU-T G.8275.1 Profile (LLS-C1/C2/C3)",
        Plane::S,
        MA,
        POS,
    ),
];

pub fn load_catalog() -> &'static [TestCase] {
    &CATALOG
}

pub fn find(id: &str) -> Option<&'static TestCase> {
    CATALOG.iter().find(|c| c.id == id)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectionError {
    #[error("unknown test case id {0:?}")]
    UnknownId(String),
    #[error("empty case selection")]
    Empty,
}

/// Cases named by `ids` (all when empty), in catalog order.
pub fn select(ids: &[String]) -> Result<Vec<&'static TestCase>, SelectionError> {
    if let Some(bad) = ids.iter().find(|id| find(id).is_none()) {
        return Err(SelectionError::UnknownId(bad.clone()));
    }
    let out: Vec<_> = CATALOG
        .iter()
        .filter(|c| ids.is_empty() || ids.iter().any(|i| i == c.id))
        .collect();
    if out.is_empty() {
        return Err(SelectionError::Empty);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn catalog_bounds() {
        let c = load_catalog();
        assert_eq!(c.len(), 31);
        assert_eq!(c[0].id, "3.1.1.7");
        assert_eq!(c[30].id, "3.3.3");
    }

    #[test]
    fn ids_unique() {
        let ids: BTreeSet<_> = CATALOG.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), CATALOG.len());
    }

    #[test]
    fn negative_cases() {
        let neg: Vec<_> = CATALOG
            .iter()
            .filter(|c| c.expected == Expectation::Negative)
            .map(|c| c.id)
            .collect();
        assert_eq!(
            neg,
            [
                "3.1.1.8",
                "3.1.3.2",
                "3.1.6.2",
                "3.1.10.2",
                "3.2.5.4.3",
                "3.2.5.4.4"
            ]
        );
    }

    #[test]
    fn selection_keeps_catalog_order() {
        let s = select(&["3.3.3".into(), "3.1.2.1".into()]).unwrap();
        assert_eq!(
            s.iter().map(|c| c.id).collect::<Vec<_>>(),
            ["3.1.2.1", "3.3.3"]
        );
        assert_eq!(select(&[]).unwrap().len(), 31);
        assert_eq!(
            select(&["9.9.9".into()]),
            Err(SelectionError::UnknownId("9.9.9".into()))
        );
    }
}
