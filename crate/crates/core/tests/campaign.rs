//! Campaign-level behavior across profiles and fault scopes.

mod common;

use common::ids;
use ofh_conformance::runner::{run_campaign, LabProfile, Verdict};

fn profile(name: &str) -> LabProfile {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("profiles")
        .join(name);
    LabProfile::load(&path).unwrap()
}

#[test]
fn shipped_profiles_load() {
    for p in [
        "default.toml",
        "calibrated.toml",
        "tcp-loopback.toml",
        "callhome-auth-fault.toml",
    ] {
        profile(p);
    }
}

#[test]
fn global_callhome_fault_blocks_everything_after_the_handshake() {
    let c = run_campaign(&profile("callhome-auth-fault.toml"), &[]).unwrap();
    let r = &c.report;
    assert_eq!(r.record("3.1.1.8").unwrap().verdict, Verdict::Pass);
    assert_eq!(r.record("3.1.1.7").unwrap().verdict, Verdict::Fail);
    for rec in r.body.records.iter().filter(|r| !r.id.starts_with("3.1.")) {
        assert_eq!(rec.verdict, Verdict::Blocked, "{}", rec.id);
        assert!(rec.blocked_reason.as_deref().unwrap().contains("3.1.1.7"));
    }
    assert!(!r.all_passed());
}

#[test]
fn tcp_loopback_passes_management_and_fronthaul() {
    let sel = ids(&["3.1.1.7", "3.1.2.1", "3.1.3.1", "3.2.5.1.1"]);
    let c = run_campaign(&profile("tcp-loopback.toml"), &sel).unwrap();
    for rec in &c.report.body.records {
        assert_eq!(rec.verdict, Verdict::Pass, "{} {:?}", rec.id, rec.checks);
    }
}

#[test]
fn calibration_profile_passes_sync_performance() {
    let c = run_campaign(&profile("calibrated.toml"), &ids(&["3.1.1.7", "3.3.3"])).unwrap();
    assert!(c.report.all_passed());
}

#[test]
fn parallel_and_sequential_bodies_match() {
    let sel = ids(&["3.1.1.7", "3.1.2.1", "3.1.6.1", "3.2.5.1.1", "3.3.2"]);
    let mut p = LabProfile {
        parallel: true,
        ..LabProfile::default()
    };
    let a = run_campaign(&p, &sel).unwrap().report;
    p.parallel = false;
    let mut b = run_campaign(&p, &sel).unwrap().report;
    b.body.profile.parallel = true;
    assert_eq!(a.body_bytes(), b.body_bytes());
}

#[test]
fn seeds_change_stimulus_not_verdicts() {
    let sel = ids(&["3.1.1.7", "3.2.5.1.1"]);
    let mut p = LabProfile::default();
    let a = run_campaign(&p, &sel).unwrap().report;
    p.seed = 12345;
    let b = run_campaign(&p, &sel).unwrap().report;
    assert!(a.all_passed() && b.all_passed());
}

#[test]
fn eaxc_layout_reaches_the_fronthaul_cases() {
    let p = LabProfile::from_toml(
        "[eaxc_layout]\ndu_port_bits = 2\nband_sector_bits = 2\ncc_bits = 4\nru_port_bits = 8\n",
    )
    .unwrap();
    let ids: Vec<String> = ["3.1.1.7", "3.2.5.1.1", "3.2.5.2.5"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let c = run_campaign(&p, &ids).unwrap();
    assert!(c.report.all_passed(), "{:?}", c.report.body.summary);
    assert_eq!(c.report.body.profile.eaxc_layout.ru_port_bits, 8);
}
