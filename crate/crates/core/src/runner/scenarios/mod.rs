//! Executable scenario for every catalog case, plus the bookkeeping a case
//! needs: checks, metrics, evidence, and the BLOCKED escape hatch.

mod cuplane;
mod mplane;
mod splane;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalog::{TestCase, Verdict, CATALOG};
use super::profile::LabProfile;
use super::testbed::{Testbed, TestbedConfig};
use crate::codec::{CaptureRecord, CaptureWriter};
use crate::mplane::{Node, Operation, RpcReply};
use crate::ru::{FaultPlan, FaultToggle, RuConfig};
use crate::sim::{derive_seed, Nanos, NS_PER_S};

/// Budget for reaching an established management session.
pub(crate) const ESTABLISH_NS: Nanos = 30 * NS_PER_S;

/// The case cannot be evaluated because a precondition never held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocked(pub String);

pub type Scenario = fn(&mut CaseRun) -> Result<(), Blocked>;

/// Scenario bindings in catalog order.
pub const BINDINGS: [(&str, Scenario); 31] = [
    ("3.1.1.7", mplane::handshake_positive),
    ("3.1.1.8", mplane::handshake_negative),
    ("3.1.2.1", mplane::subscription),
    ("3.1.3.1", mplane::supervision_positive),
    ("3.1.3.2", mplane::supervision_negative),
    ("3.1.4.1", mplane::retrieval_unfiltered),
    ("3.1.4.2", mplane::retrieval_filtered),
    ("3.1.5.1", mplane::alarm_notification),
    ("3.1.5.2", mplane::alarm_list),
    ("3.1.6.1", mplane::software_update_positive),
    ("3.1.6.2", mplane::software_update_negative),
    ("3.1.7.1", mplane::activation_without_reset),
    ("3.1.7.2", mplane::reset_after_activation),
    ("3.1.8.6", mplane::hierarchical_sudo),
    ("3.1.10.1", mplane::configurability_positive),
    ("3.1.10.2", mplane::configurability_negative),
    ("3.1.12.1", mplane::troubleshooting_log),
    ("3.1.12.2", mplane::trace_log),
    ("3.2.5.1.1", cuplane::base_dl_ul),
    ("3.2.5.1.2", cuplane::resource_allocation),
    ("3.2.5.1.3", cuplane::rb_parameter),
    ("3.2.5.2.1", cuplane::no_beamforming_dl),
    ("3.2.5.2.2", cuplane::no_beamforming_ul),
    ("3.2.5.2.5", cuplane::weight_beamforming),
    ("3.2.5.4.1", cuplane::dlm_dl_positive),
    ("3.2.5.4.2", cuplane::dlm_ul_positive),
    ("3.2.5.4.3", cuplane::dlm_dl_negative),
    ("3.2.5.4.4", cuplane::dlm_ul_negative),
    ("3.2.5.8.1", cuplane::prach),
    ("3.3.2", splane::functional),
    ("3.3.3", splane::performance),
];

const fn str_eq(a: &str, b: &str) -> bool {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    if a.len() != b.len() {
        return false;
    }
    let mut i = 0;
    while i < a.len() {
        if a[i] != b[i] {
            return false;
        }
        i += 1;
    }
    true
}

const fn bindings_cover_catalog() -> bool {
    let mut i = 0;
    while i < CATALOG.len() {
        if !str_eq(BINDINGS[i].0, CATALOG[i].id) {
            return false;
        }
        i += 1;
    }
    true
}

const _: () = assert!(
    bindings_cover_catalog(),
    "every catalog case needs a scenario binding"
);

pub fn scenario_for(id: &str) -> Option<Scenario> {
    BINDINGS.iter().find(|(i, _)| *i == id).map(|(_, f)| *f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One evidence file, named relative to the case directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    pub blocked_reason: Option<String>,
    pub faults: Vec<FaultToggle>,
    /// Simulated time consumed, summed over the case's testbeds.
    pub sim_duration_ns: Nanos,
    pub evidence: Vec<Evidence>,
}

impl CaseOutcome {
    pub fn blocked(reason: impl Into<String>, faults: Vec<FaultToggle>) -> Self {
        Self {
            verdict: Verdict::Blocked,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            blocked_reason: Some(reason.into()),
            faults,
            sim_duration_ns: 0,
            evidence: Vec::new(),
        }
    }
}

/// State of one case execution.
pub struct CaseRun<'p> {
    pub case: &'static TestCase,
    pub profile: &'p LabProfile,
    pub faults: FaultPlan,
    seed: u64,
    checks: Vec<Check>,
    metrics: BTreeMap<String, Value>,
    evidence: BTreeMap<String, Vec<u8>>,
    sim_ns: BTreeMap<String, Nanos>,
}

impl<'p> CaseRun<'p> {
    pub fn new(case: &'static TestCase, profile: &'p LabProfile) -> Self {
        Self {
            case,
            profile,
            faults: profile.faults.plan_for(case.id),
            seed: derive_seed(profile.seed, case.id),
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            evidence: BTreeMap::new(),
            sim_ns: BTreeMap::new(),
        }
    }

    pub fn config(&self, label: &str) -> TestbedConfig {
        TestbedConfig {
            faults: self.faults.clone(),
            transport: self.profile.transport,
            seed: derive_seed(self.seed, label),
            kick_interval_s: self.profile.supervision.interval_s,
            kick_guard_s: self.profile.supervision.guard_s,
            ru: RuConfig {
                eaxc_layout: self.profile.eaxc_layout,
                ..RuConfig::default()
            },
            ..TestbedConfig::default()
        }
    }

    /// Fresh testbed for this case; `label` names its evidence.
    pub fn bench(&mut self, label: &str) -> Result<Testbed, Blocked> {
        self.bench_from(self.config(label))
    }

    pub fn bench_from(&mut self, cfg: TestbedConfig) -> Result<Testbed, Blocked> {
        Testbed::new(cfg).map_err(|e| Blocked(format!("testbed construction: {e}")))
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
        passed
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(key.into(), v);
    }

    pub fn attach(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.evidence.insert(name.into(), bytes);
    }

    /// Records the testbed's captures and simulated time under `label`.
    pub fn collect(&mut self, tb: &Testbed, label: &str) {
        self.sim_ns.insert(label.into(), tb.now());
        let sets = [
            ("mplane", tb.client.wire_log().to_vec()),
            ("fronthaul", tb.fronthaul_capture().to_vec()),
            ("rf", tb.ru.rf().to_capture_records()),
            ("actions", tb.ru.action_capture()),
        ];
        for (kind, records) in sets {
            if !records.is_empty() {
                self.attach(format!("{label}-{kind}.cap"), encode_capture(&records));
            }
        }
    }

    /// Collects `tb` and returns the blocking reason.
    pub fn blocked(&mut self, tb: &Testbed, label: &str, reason: impl Into<String>) -> Blocked {
        self.collect(tb, label);
        Blocked(reason.into())
    }

    /// Powers on and waits for the management session.
    pub fn session(&mut self, tb: &mut Testbed, label: &str) -> Result<(), Blocked> {
        if tb.establish(ESTABLISH_NS) {
            return Ok(());
        }
        let phase = tb.ru.phase().as_str();
        Err(self.blocked(
            tb,
            label,
            format!("no management session (O-RU phase {phase})"),
        ))
    }

    /// One RPC whose reply must arrive.
    pub fn rpc(
        &mut self,
        tb: &mut Testbed,
        label: &str,
        op: Operation,
    ) -> Result<RpcReply, Blocked> {
        let name = op.name();
        tb.call(op)
            .map_err(|e| self.blocked(tb, label, format!("{name}: {e}")))
    }

    /// Filtered get returning the reply tree; an empty filter reads everything.
    pub fn get(&mut self, tb: &mut Testbed, label: &str, filter: &str) -> Result<Node, Blocked> {
        let op = if filter.is_empty() {
            Operation::Get
        } else {
            Operation::GetWithFilter {
                filter: filter.into(),
            }
        };
        let r = self.rpc(tb, label, op)?;
        match (r.fragment(), r.rpc_error()) {
            (Some(n), _) => Ok(n),
            (None, Some(e)) => Err(self.blocked(tb, label, format!("get {filter}: {}", e.message))),
            (None, None) => Err(self.blocked(tb, label, format!("get {filter}: no data"))),
        }
    }

    pub fn finish(self, result: Result<(), Blocked>) -> CaseOutcome {
        let (verdict, blocked_reason) = match result {
            Err(Blocked(reason)) => (Verdict::Blocked, Some(reason)),
            Ok(()) if !self.checks.is_empty() && self.checks.iter().all(|c| c.passed) => {
                (Verdict::Pass, None)
            }
            Ok(()) => (Verdict::Fail, None),
        };
        CaseOutcome {
            verdict,
            checks: self.checks,
            metrics: self.metrics,
            blocked_reason,
            faults: self.faults.active(),
            sim_duration_ns: self.sim_ns.values().sum(),
            evidence: self
                .evidence
                .into_iter()
                .map(|(name, bytes)| Evidence { name, bytes })
                .collect(),
        }
    }
}

/// Runs one case in a fresh environment.
pub fn execute(case: &'static TestCase, profile: &LabProfile) -> CaseOutcome {
    let mut run = CaseRun::new(case, profile);
    let result = match scenario_for(case.id) {
        Some(f) => f(&mut run),
        None => Err(Blocked(format!("no scenario bound to {}", case.id))),
    };
    run.finish(result)
}

fn encode_capture(records: &[CaptureRecord]) -> Vec<u8> {
    let mut w = CaptureWriter::new(Vec::new());
    for r in records {
        w.write_record(r).expect("writing to memory cannot fail");
    }
    w.into_inner()
}

/// Node at a slash-separated path below `root`.
pub(crate) fn lookup<'a>(root: &'a Node, path: &str) -> Option<&'a Node> {
    path.split('/')
        .filter(|s| !s.is_empty())
        .try_fold(root, |n, seg| n.child(seg))
}

pub(crate) fn leaf(root: &Node, path: &str) -> Option<String> {
    lookup(root, path)
        .and_then(Node::as_leaf)
        .map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::catalog::find;

    #[test]
    fn every_case_is_bound() {
        for c in CATALOG.iter() {
            assert!(scenario_for(c.id).is_some(), "{}", c.id);
        }
    }

    #[test]
    fn verdict_needs_checks() {
        let p = LabProfile::default();
        let case = find("3.1.2.1").unwrap();
        assert_eq!(CaseRun::new(case, &p).finish(Ok(())).verdict, Verdict::Fail);
        let mut run = CaseRun::new(case, &p);
        run.check("a", true, "");
        assert_eq!(run.finish(Ok(())).verdict, Verdict::Pass);
        let mut run = CaseRun::new(case, &p);
        run.check("a", true, "");
        run.check("b", false, "");
        assert_eq!(run.finish(Ok(())).verdict, Verdict::Fail);
        let run = CaseRun::new(case, &p);
        let o = run.finish(Err(Blocked("x".into())));
        assert_eq!(
            (o.verdict, o.blocked_reason.as_deref()),
            (Verdict::Blocked, Some("x"))
        );
    }

    #[test]
    fn lookup_walks_paths() {
        let mut ds = crate::mplane::Datastore::new();
        ds.set_leaf("a/b/c", "1");
        assert_eq!(leaf(ds.root(), "a/b/c").as_deref(), Some("1"));
        assert!(lookup(ds.root(), "a/x").is_none());
    }
}
