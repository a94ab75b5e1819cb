//! C ABI over the conformance harness.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free`. Every fallible call returns an `OfhStatus`, and
//! on failure the message is kept per thread for `ofh_last_error`. Panics are
//! caught at the boundary and reported as `OFH_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;

use ofh_conformance::runner::{
    render_report, run_campaign, write_run, Campaign, LabProfile, ReportFormat, Verdict, CATALOG,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfhStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Profile = 3,
    Selection = 4,
    Io = 5,
    NotFound = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfhVerdict {
    Pass = 0,
    Fail = 1,
    Blocked = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfhFormat {
    Structured = 0,
    Human = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OfhSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub blocked: usize,
}

/// Opaque lab profile.
pub struct OfhProfile(LabProfile);

/// Opaque finished campaign with its evidence.
pub struct OfhReport(Campaign);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: OfhStatus, msg: impl Into<String>) -> OfhStatus {
    set_error(msg);
    status
}

/// Runs `f` behind the panic boundary.
fn guard(f: impl FnOnce() -> OfhStatus) -> OfhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(OfhStatus::Panic, msg)
        }
    }
}

/// # Safety
/// `p` is NULL or a NUL-terminated string valid for the call.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, OfhStatus> {
    if p.is_null() {
        return Err(fail(OfhStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(OfhStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn give<T>(out: *mut *mut T, value: T) -> OfhStatus {
    // SAFETY: callers check `out` for NULL before building `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    OfhStatus::Ok
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ofh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Harness version as a static string.
#[no_mangle]
pub extern "C" fn ofh_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version has no interior NUL"),
        };
    V.as_ptr()
}

fn catalog_ids() -> &'static [CString] {
    static IDS: OnceLock<Vec<CString>> = OnceLock::new();
    IDS.get_or_init(|| {
        CATALOG
            .iter()
            .map(|c| CString::new(c.id).expect("ids have no NUL"))
            .collect()
    })
}

#[no_mangle]
pub extern "C" fn ofh_catalog_len() -> usize {
    CATALOG.len()
}

/// Case id at `index` in catalog order as a static string, or NULL when out
/// of range.
#[no_mangle]
pub extern "C" fn ofh_catalog_id(index: usize) -> *const c_char {
    catalog_ids()
        .get(index)
        .map_or(std::ptr::null(), |c| c.as_ptr())
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ofh_profile_default(out: *mut *mut OfhProfile) -> OfhStatus {
    guard(|| {
        if out.is_null() {
            return fail(OfhStatus::NullArgument, "out is NULL");
        }
        give(out, OfhProfile(LabProfile::default()))
    })
}

/// # Safety
/// `toml` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ofh_profile_from_toml(
    toml: *const c_char,
    out: *mut *mut OfhProfile,
) -> OfhStatus {
    guard(|| {
        if out.is_null() {
            return fail(OfhStatus::NullArgument, "out is NULL");
        }
        let text = match str_arg(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match LabProfile::from_toml(text) {
            Ok(p) => give(out, OfhProfile(p)),
            Err(e) => fail(OfhStatus::Profile, e.to_string()),
        }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ofh_profile_load(
    path: *const c_char,
    out: *mut *mut OfhProfile,
) -> OfhStatus {
    guard(|| {
        if out.is_null() {
            return fail(OfhStatus::NullArgument, "out is NULL");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match LabProfile::load(Path::new(path)) {
            Ok(p) => give(out, OfhProfile(p)),
            Err(e) => fail(OfhStatus::Profile, e.to_string()),
        }
    })
}

/// # Safety
/// `profile` must come from an `ofh_profile_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ofh_profile_set_seed(profile: *mut OfhProfile, seed: u64) -> OfhStatus {
    guard(|| match profile.as_mut() {
        Some(p) => {
            p.0.seed = seed;
            OfhStatus::Ok
        }
        None => fail(OfhStatus::NullArgument, "profile is NULL"),
    })
}

/// # Safety
/// `profile` is NULL or an unreleased handle.
#[no_mangle]
pub unsafe extern "C" fn ofh_profile_free(profile: *mut OfhProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Runs the cases named by `ids[0..n_ids]`, or the whole catalog when
/// `n_ids` is 0.
///
/// # Safety
/// `profile` must be a live handle, `ids` valid for `n_ids` NUL-terminated
/// strings (may be NULL when `n_ids` is 0), `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ofh_run(
    profile: *const OfhProfile,
    ids: *const *const c_char,
    n_ids: usize,
    out: *mut *mut OfhReport,
) -> OfhStatus {
    guard(|| {
        let Some(p) = profile.as_ref() else {
            return fail(OfhStatus::NullArgument, "profile is NULL");
        };
        if out.is_null() {
            return fail(OfhStatus::NullArgument, "out is NULL");
        }
        if n_ids > 0 && ids.is_null() {
            return fail(OfhStatus::NullArgument, "ids is NULL");
        }
        let mut selection = Vec::with_capacity(n_ids);
        for i in 0..n_ids {
            match str_arg(*ids.add(i), "case id") {
                Ok(s) => selection.push(s.to_string()),
                Err(s) => return s,
            }
        }
        match run_campaign(&p.0, &selection) {
            Ok(c) => give(out, OfhReport(c)),
            Err(e) => fail(OfhStatus::Selection, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be a live handle; `out` valid for an `OfhSummary` write.
#[no_mangle]
pub unsafe extern "C" fn ofh_report_summary(
    report: *const OfhReport,
    out: *mut OfhSummary,
) -> OfhStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            return fail(OfhStatus::NullArgument, "report or out is NULL");
        };
        let s = r.0.report.body.summary;
        *out = OfhSummary {
            total: s.total,
            pass: s.pass,
            fail: s.fail,
            blocked: s.blocked,
        };
        OfhStatus::Ok
    })
}

/// # Safety
/// `report` must be a live handle, `id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ofh_report_verdict(
    report: *const OfhReport,
    id: *const c_char,
    out: *mut OfhVerdict,
) -> OfhStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            return fail(OfhStatus::NullArgument, "report or out is NULL");
        };
        let id = match str_arg(id, "id") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let Some(rec) = r.0.report.record(id) else {
            return fail(OfhStatus::NotFound, format!("case {id} not in report"));
        };
        *out = match rec.verdict {
            Verdict::Pass => OfhVerdict::Pass,
            Verdict::Fail => OfhVerdict::Fail,
            Verdict::Blocked => OfhVerdict::Blocked,
        };
        OfhStatus::Ok
    })
}

/// Renders the report; release the string with `ofh_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ofh_report_render(
    report: *const OfhReport,
    format: OfhFormat,
    out: *mut *mut c_char,
) -> OfhStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            return fail(OfhStatus::NullArgument, "report or out is NULL");
        };
        let f = match format {
            OfhFormat::Structured => ReportFormat::Structured,
            OfhFormat::Human => ReportFormat::Human,
        };
        let text = render_report(&r.0.report, f);
        *out = CString::new(text).expect("reports have no NUL").into_raw();
        OfhStatus::Ok
    })
}

/// Writes the run directory under `root`.
///
/// # Safety
/// `report` must be a live handle; `root` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ofh_report_write(
    report: *const OfhReport,
    root: *const c_char,
) -> OfhStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(OfhStatus::NullArgument, "report is NULL");
        };
        let root = match str_arg(root, "root") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match write_run(Path::new(root), &r.0) {
            Ok(_) => OfhStatus::Ok,
            Err(e) => fail(OfhStatus::Io, e.to_string()),
        }
    })
}

/// # Safety
/// `report` is NULL or an unreleased handle.
#[no_mangle]
pub unsafe extern "C" fn ofh_report_free(report: *mut OfhReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` is NULL or a string returned by this library and not yet released.
#[no_mangle]
pub unsafe extern "C" fn ofh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
