//! Command-line behavior: listing, exit codes, run directories, rendering.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ofh-conformance"));
    c.args(args).env_remove("OFH_CONFORMANCE_OUT");
    if let Some(p) = out_env {
        c.env("OFH_CONFORMANCE_OUT", p);
    }
    c.output().expect("binary runs")
}

fn profile(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("profiles")
        .join(name)
        .display()
        .to_string()
}

fn only_run_dir(root: &Path) -> PathBuf {
    let dirs: Vec<_> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

#[test]
fn list_prints_the_catalog() {
    let o = cli(&["list"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 31);
    assert!(lines[0].starts_with("3.1.1.7 "));
    assert!(lines[30].starts_with("3.3.3 "));
}

#[test]
fn single_case_run_exits_zero_and_writes_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().display().to_string();
    let o = cli(&["run", "--case", "3.1.2.1", "--out", &out], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("3.1.2.1") && text.contains("Pass"));
    let dir = only_run_dir(tmp.path());
    for f in ["report.json", "report.txt"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert!(dir.join("3.1.2.1").is_dir());
}

#[test]
fn unknown_case_fails_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(
        &[
            "run",
            "--case",
            "9.9.9",
            "--out",
            &tmp.path().display().to_string(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("9.9.9"));
}

#[test]
fn malformed_flags_print_usage() {
    for args in [
        &["run", "--seed", "x"][..],
        &["run", "--bogus"],
        &["report"],
        &["frobnicate"],
    ] {
        let o = cli(args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains("Usage"),
            "{args:?}"
        );
    }
}

#[test]
fn bad_profile_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.toml");
    std::fs::write(&p, "te_limit_ns = -1.0\n").unwrap();
    let o = cli(
        &[
            "run",
            "--profile",
            &p.display().to_string(),
            "--case",
            "3.1.2.1",
        ],
        Some(tmp.path()),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn environment_names_the_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(&["run", "--case", "3.1.4.1"], Some(tmp.path()));
    assert!(o.status.success());
    only_run_dir(tmp.path());
}

#[test]
fn blocked_cases_make_the_run_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(
        &[
            "run",
            "--profile",
            &profile("callhome-auth-fault.toml"),
            "--case",
            "3.1.1.7",
            "--case",
            "3.1.1.8",
            "--case",
            "3.3.2",
        ],
        Some(tmp.path()),
    );
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("1 Pass, 1 Fail, 1 Blocked"), "{text}");
}

#[test]
fn report_renders_both_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(
        &["run", "--case", "3.1.2.1", "--seed", "9"],
        Some(tmp.path()),
    );
    assert!(o.status.success());
    let dir = only_run_dir(tmp.path()).display().to_string();
    let human = cli(&["report", "--in", &dir, "--format", "human"], None);
    assert!(human.status.success());
    assert_eq!(
        String::from_utf8(human.stdout).unwrap(),
        std::fs::read_to_string(Path::new(&dir).join("report.txt")).unwrap()
    );
    let structured = cli(&["report", "--in", &dir, "--format", "structured"], None);
    let v: serde_json::Value = serde_json::from_slice(&structured.stdout).unwrap();
    assert_eq!(v["body"]["profile"]["seed"], 9);
    assert_eq!(v["body"]["records"][0]["verdict"], "PASS");
    let missing = cli(
        &[
            "report",
            "--in",
            &tmp.path().join("nope").display().to_string(),
        ],
        None,
    );
    assert_eq!(missing.status.code(), Some(2));
}
