//! Campaign execution: management cases first, then fronthaul and sync
//! cases, each in a fresh environment; records in catalog order.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use super::catalog::{select, Plane, SelectionError, TestCase, Verdict, SESSION_GATE};
use super::profile::LabProfile;
use super::report::{render_report, CaseRecord, ReportFormat, RunMeta, TestReport};
use super::scenarios::{execute, CaseOutcome, Evidence};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "OFH_CONFORMANCE_OUT";
pub const DEFAULT_OUT: &str = "ofh-reports";

/// A finished campaign: the report plus evidence payloads by case id.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub report: TestReport,
    pub evidence: Vec<(String, Vec<Evidence>)>,
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn timed(case: &'static TestCase, profile: &LabProfile) -> (CaseOutcome, u64) {
    let t = Instant::now();
    let o = execute(case, profile);
    (o, t.elapsed().as_millis() as u64)
}

fn run_all(
    cases: &[&'static TestCase],
    profile: &LabProfile,
    f: impl Fn(&'static TestCase) -> (CaseOutcome, u64) + Sync,
) -> Vec<(CaseOutcome, u64)> {
    if profile.parallel {
        cases.par_iter().map(|c| f(c)).collect()
    } else {
        cases.iter().map(|c| f(c)).collect()
    }
}

pub fn run_campaign(
    profile: &LabProfile,
    selection: &[String],
) -> Result<Campaign, SelectionError> {
    let cases = select(selection)?;
    let started = unix_ms();
    let (mplane, rest): (Vec<_>, Vec<_>) = cases.iter().partition(|c| c.plane == Plane::M);
    let m_out = run_all(&mplane, profile, |c| timed(c, profile));
    let gate = mplane
        .iter()
        .zip(&m_out)
        .find(|(c, _)| c.is_session_gate())
        .map(|(_, (o, _))| o.verdict);
    let blocked_by = match gate {
        Some(v) if v != Verdict::Pass => {
            Some(format!("session establishment case {SESSION_GATE} is {v}"))
        }
        _ => None,
    };
    let rest_out = run_all(&rest, profile, |c| match &blocked_by {
        Some(reason) => (
            CaseOutcome::blocked(reason.clone(), profile.faults.plan_for(c.id).active()),
            0,
        ),
        None => timed(c, profile),
    });
    let mut done: Vec<(&'static TestCase, CaseOutcome, u64)> = mplane
        .into_iter()
        .zip(m_out)
        .chain(rest.into_iter().zip(rest_out))
        .map(|(c, (o, ms))| (c, o, ms))
        .collect();
    done.sort_by_key(|(c, _, _)| cases.iter().position(|k| k.id == c.id));
    let mut meta = RunMeta {
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        ..RunMeta::default()
    };
    let mut records = Vec::with_capacity(done.len());
    let mut evidence = Vec::with_capacity(done.len());
    for (case, outcome, ms) in done {
        meta.wall_ms.insert(case.id.into(), ms);
        records.push(CaseRecord::new(case, &outcome));
        evidence.push((case.id.to_string(), outcome.evidence));
    }
    let run_id = format!("run-{started}-{:x}", std::process::id());
    Ok(Campaign {
        report: TestReport::new(run_id, meta, profile.clone(), records),
        evidence,
    })
}

/// Output root from an explicit flag, the environment, or the default.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Writes `report.json`, `report.txt` and per-case evidence under
/// `root/<run_id>`; returns that directory.
pub fn write_run(root: &Path, campaign: &Campaign) -> std::io::Result<PathBuf> {
    let dir = root.join(&campaign.report.run_id);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(
        dir.join("report.json"),
        render_report(&campaign.report, ReportFormat::Structured),
    )?;
    std::fs::write(
        dir.join("report.txt"),
        render_report(&campaign.report, ReportFormat::Human),
    )?;
    for (id, files) in &campaign.evidence {
        if files.is_empty() {
            continue;
        }
        let case_dir = dir.join(id);
        std::fs::create_dir_all(&case_dir)?;
        for e in files {
            std::fs::write(case_dir.join(&e.name), &e.bytes)?;
        }
    }
    Ok(dir)
}
