//! Test report: a deterministic body (profile, records, summary) plus a
//! meta section holding everything that varies between identical runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalog::{Category, Expectation, Plane, TestCase, Verdict};
use super::profile::LabProfile;
use super::scenarios::{CaseOutcome, Check};
use crate::ru::FaultToggle;
use crate::sim::Nanos;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub title: String,
    pub plane: Plane,
    pub category: Category,
    pub expected: Expectation,
    pub verdict: Verdict,
    /// Fault toggles active in this case's environment.
    pub faults: Vec<FaultToggle>,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocked_reason: Option<String>,
    /// Evidence files relative to the run directory.
    pub evidence: Vec<String>,
    pub sim_duration_ns: Nanos,
}

impl CaseRecord {
    pub fn new(case: &TestCase, outcome: &CaseOutcome) -> Self {
        Self {
            id: case.id.into(),
            title: case.title.into(),
            plane: case.plane,
            category: case.category,
            expected: case.expected,
            verdict: outcome.verdict,
            faults: outcome.faults.clone(),
            metrics: outcome.metrics.clone(),
            checks: outcome.checks.clone(),
            blocked_reason: outcome.blocked_reason.clone(),
            evidence: outcome
                .evidence
                .iter()
                .map(|e| format!("{}/{}", case.id, e.name))
                .collect(),
            sim_duration_ns: outcome.sim_duration_ns,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub blocked: usize,
}

impl Summary {
    pub fn tally(records: &[CaseRecord]) -> Self {
        let count = |v| records.iter().filter(|r| r.verdict == v).count();
        Self {
            total: records.len(),
            pass: count(Verdict::Pass),
            fail: count(Verdict::Fail),
            blocked: count(Verdict::Blocked),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub harness: String,
    pub version: String,
    pub components: BTreeMap<String, String>,
}

impl Default for Environment {
    fn default() -> Self {
        let version = env!("CARGO_PKG_VERSION").to_string();
        let components = [
            "fronthaul-codec",
            "mplane-engine",
            "splane-engine",
            "cuplane-scenarios",
            "ru-emulator",
            "conformance-runner",
        ]
        .into_iter()
        .map(|c| (c.to_string(), version.clone()))
        .collect();
        Self {
            harness: env!("CARGO_PKG_NAME").into(),
            version,
            components,
        }
    }
}

/// Everything two identical runs must agree on, byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub profile: LabProfile,
    pub selection: Vec<String>,
    pub records: Vec<CaseRecord>,
    pub summary: Summary,
    pub environment: Environment,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// Wall-clock time per case, keyed by id.
    pub wall_ms: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub run_id: String,
    pub meta: RunMeta,
    pub body: ReportBody,
}

impl TestReport {
    pub fn new(
        run_id: String,
        meta: RunMeta,
        profile: LabProfile,
        records: Vec<CaseRecord>,
    ) -> Self {
        let summary = Summary::tally(&records);
        Self {
            run_id,
            meta,
            body: ReportBody {
                profile,
                selection: records.iter().map(|r| r.id.clone()).collect(),
                records,
                summary,
                environment: Environment::default(),
            },
        }
    }

    /// Exit-code rule: no FAIL and no BLOCKED.
    pub fn all_passed(&self) -> bool {
        let s = &self.body.summary;
        s.fail == 0 && s.blocked == 0 && s.total > 0
    }

    pub fn record(&self, id: &str) -> Option<&CaseRecord> {
        self.body.records.iter().find(|r| r.id == id)
    }

    /// Canonical structured form of the body alone.
    pub fn body_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(&self.body).expect("report bodies serialize");
        v.push(b'\n');
        v
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let r: TestReport = serde_json::from_str(&text)?;
        if Summary::tally(&r.body.records) != r.body.summary {
            return Err(ReportError::Inconsistent(
                "summary does not match records".into(),
            ));
        }
        Ok(r)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("reading report {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing report: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Structured,
    Human,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "json" => Ok(Self::Structured),
            "human" | "text" => Ok(Self::Human),
            other => Err(format!(
                "unknown report format {other:?} (structured|human)"
            )),
        }
    }
}

fn human_verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "Pass",
        Verdict::Fail => "Fail",
        Verdict::Blocked => "Blocked",
    }
}

pub fn render_report(report: &TestReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        ReportFormat::Human => render_human(report),
    }
}

fn render_human(report: &TestReport) -> String {
    let records = &report.body.records;
    let id_w = records.iter().map(|r| r.id.len()).max().unwrap_or(0).max(2);
    let title_w = records
        .iter()
        .map(|r| r.title.len())
        .max()
        .unwrap_or(0)
        .max(11);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Profile: {}  seed: {}",
        report.body.profile.name, report.body.profile.seed
    );
    let _ = writeln!(s, "{:<id_w$}  {:<title_w$}  Verdict", "ID", "Description");
    let _ = writeln!(s, "{}  {}  -------", "-".repeat(id_w), "-".repeat(title_w));
    for r in records {
        let _ = writeln!(
            s,
            "{:<id_w$}  {:<title_w$}  {}",
            r.id,
            r.title,
            human_verdict(r.verdict)
        );
    }
    let sum = &report.body.summary;
    let _ = writeln!(
        s,
        "\n{} cases: {} Pass, {} Fail, {} Blocked",
        sum.total, sum.pass, sum.fail, sum.blocked
    );
    for r in records.iter().filter(|r| r.verdict != Verdict::Pass) {
        match &r.blocked_reason {
            Some(reason) => {
                let _ = writeln!(s, "  {} blocked: {reason}", r.id);
            }
            None => {
                for c in r.checks.iter().filter(|c| !c.passed) {
                    let _ = writeln!(s, "  {} failed {}: {}", r.id, c.name, c.detail);
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::catalog::CATALOG;

    fn outcome(v: Verdict) -> CaseOutcome {
        let mut o = CaseOutcome::blocked("gate", Vec::new());
        o.verdict = v;
        if v != Verdict::Blocked {
            o.blocked_reason = None;
        }
        o
    }

    fn report(verdicts: &[Verdict]) -> TestReport {
        let records = CATALOG
            .iter()
            .zip(verdicts)
            .map(|(c, v)| CaseRecord::new(c, &outcome(*v)))
            .collect();
        TestReport::new(
            "r".into(),
            RunMeta::default(),
            LabProfile::default(),
            records,
        )
    }

    #[test]
    fn summary_tallies_records() {
        let r = report(&[
            Verdict::Pass,
            Verdict::Fail,
            Verdict::Blocked,
            Verdict::Pass,
        ]);
        assert_eq!(
            r.body.summary,
            Summary {
                total: 4,
                pass: 2,
                fail: 1,
                blocked: 1
            }
        );
        assert!(!r.all_passed());
        assert!(report(&[Verdict::Pass; 3]).all_passed());
    }

    #[test]
    fn human_table_mirrors_catalog() {
        let r = report(&[Verdict::Pass; 31]);
        let text = render_report(&r, ReportFormat::Human);
        let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("3.")).collect();
        assert_eq!(rows.len(), 31);
        assert!(rows.iter().all(|l| l.ends_with("Pass")));
    }

    #[test]
    fn structured_render_is_stable_and_round_trips() {
        let r = report(&[Verdict::Pass, Verdict::Blocked]);
        let a = render_report(&r, ReportFormat::Structured);
        let back: TestReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
        assert_eq!(render_report(&back, ReportFormat::Structured), a);
    }

    #[test]
    fn body_excludes_run_identity() {
        let mut a = report(&[Verdict::Pass]);
        let b = a.body_bytes();
        a.run_id = "other".into();
        a.meta.started_unix_ms = 42;
        assert_eq!(a.body_bytes(), b);
    }

    #[test]
    fn formats_parse() {
        assert_eq!("human".parse::<ReportFormat>(), Ok(ReportFormat::Human));
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
