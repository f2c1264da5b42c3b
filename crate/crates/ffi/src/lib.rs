//! C ABI for the threshold solver, failure recursion and verifier.
//!
//! Every fallible function returns an [`FtlabStatus`]; on failure the
//! message is available from [`ftlab_last_error`] on the same thread.
//! A null census handle means the built-in table.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ftlab::census::{load_census, paper_census, validate, CensusLevel, CensusSet, LocationKind};
use ftlab::failure_model::recurse_failures;
use ftlab::lattice::Granularity;
use ftlab::threshold::{
    asymptotic_threshold, level_threshold, Ratios, SolverError, ThresholdResult,
};
use ftlab::verify::{verify_component, Component};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoRoot = 3,
    CensusInvalid = 4,
    Io = 5,
    VerifyFailed = 6,
    Panic = 7,
}

/// Location kinds, which also name the gadgets.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtlabKind {
    Memory = 0,
    Swap = 1,
    TGate = 2,
    Readout = 3,
}

impl From<FtlabKind> for LocationKind {
    fn from(k: FtlabKind) -> Self {
        match k {
            FtlabKind::Memory => LocationKind::Memory,
            FtlabKind::Swap => LocationKind::Swap,
            FtlabKind::TGate => LocationKind::TGate,
            FtlabKind::Readout => LocationKind::Readout,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtlabLevel {
    Level1 = 0,
    LevelN = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtlabGranularity {
    Logical = 0,
    Physical = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtlabRatios {
    pub rm: f64,
    pub rr: f64,
    pub tr: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FtlabThreshold {
    pub level: u32,
    pub threshold: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: u32,
    pub residual: f64,
    pub reference_failure: f64,
    pub converged: bool,
    pub sign_changes: u32,
}

impl From<&ThresholdResult> for FtlabThreshold {
    fn from(r: &ThresholdResult) -> Self {
        FtlabThreshold {
            level: r.level,
            threshold: r.threshold,
            bracket_lo: r.bracket.0,
            bracket_hi: r.bracket.1,
            iterations: r.iterations,
            residual: r.residual,
            reference_failure: r.reference_failure,
            converged: r.converged,
            sign_changes: r.sign_changes as u32,
        }
    }
}

/// Gadget failure probabilities, indexed like [`FtlabKind`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FtlabFailures {
    pub level: u32,
    pub probs: [f64; 4],
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FtlabVerifySummary {
    pub faults: u64,
    pub failure_count: u64,
    pub max_weight: u32,
    pub conflicts: u64,
    pub unknown_patterns: u64,
    pub pass: bool,
}

/// Opaque census table.
pub struct FtlabCensus {
    set: CensusSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: FtlabStatus, msg: impl AsRef<str>) -> FtlabStatus {
    set_error(msg.as_ref());
    status
}

fn guarded(f: impl FnOnce() -> FtlabStatus) -> FtlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == FtlabStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(FtlabStatus::Panic, "internal panic"),
    }
}

fn solver_status(e: SolverError) -> FtlabStatus {
    let s = match e {
        SolverError::NoRoot { .. } => FtlabStatus::NoRoot,
        _ => FtlabStatus::InvalidArgument,
    };
    fail(s, e.to_string())
}

unsafe fn census_ref(c: *const FtlabCensus, fallback: &CensusSet) -> &CensusSet {
    if c.is_null() {
        fallback
    } else {
        &(*c).set
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ftlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ftlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New handle holding the built-in census. Free with [`ftlab_census_free`].
#[no_mangle]
pub extern "C" fn ftlab_census_builtin() -> *mut FtlabCensus {
    Box::into_raw(Box::new(FtlabCensus {
        set: paper_census(),
    }))
}

/// Loads and validates a census file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ftlab_census_load(
    path: *const c_char,
    out: *mut *mut FtlabCensus,
) -> FtlabStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            return fail(FtlabStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(p) = CStr::from_ptr(path).to_str() else {
            return fail(FtlabStatus::InvalidArgument, "path is not UTF-8");
        };
        let f = match File::open(p) {
            Ok(f) => f,
            Err(e) => return fail(FtlabStatus::Io, format!("{p}: {e}")),
        };
        let set = match load_census(BufReader::new(f)) {
            Ok(s) => s,
            Err(e) => return fail(FtlabStatus::CensusInvalid, format!("{p}: {e}")),
        };
        let v = validate(&set);
        if let Some(first) = v.first() {
            return fail(
                FtlabStatus::CensusInvalid,
                format!("{p}: {} violation(s), first: {first}", v.len()),
            );
        }
        *out = Box::into_raw(Box::new(FtlabCensus { set }));
        FtlabStatus::Ok
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ftlab_census_free(c: *mut FtlabCensus) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Count of `kind` locations in the `gadget` row at `tr`.
///
/// # Safety
/// `c` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ftlab_census_count(
    c: *const FtlabCensus,
    level: FtlabLevel,
    gadget: FtlabKind,
    kind: FtlabKind,
    tr: f64,
    out: *mut f64,
) -> FtlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FtlabStatus::NullPointer, "null output");
        }
        let builtin = paper_census();
        let set = census_ref(c, &builtin);
        let level = match level {
            FtlabLevel::Level1 => CensusLevel::Level1,
            FtlabLevel::LevelN => CensusLevel::LevelN,
        };
        match set.get(level, gadget.into()) {
            Ok(row) => {
                *out = row.count(kind.into()).at(tr);
                FtlabStatus::Ok
            }
            Err(e) => fail(FtlabStatus::CensusInvalid, e.to_string()),
        }
    })
}

/// Level-`level` threshold.
///
/// # Safety
/// `c` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ftlab_level_threshold(
    c: *const FtlabCensus,
    ratios: FtlabRatios,
    level: u32,
    out: *mut FtlabThreshold,
) -> FtlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FtlabStatus::NullPointer, "null output");
        }
        let builtin = paper_census();
        let set = census_ref(c, &builtin);
        match level_threshold(Ratios::new(ratios.rm, ratios.rr, ratios.tr), level, set) {
            Ok(r) => {
                *out = (&r).into();
                FtlabStatus::Ok
            }
            Err(e) => solver_status(e),
        }
    })
}

/// Asymptotic threshold.
///
/// # Safety
/// `c` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ftlab_asymptotic_threshold(
    c: *const FtlabCensus,
    ratios: FtlabRatios,
    out: *mut FtlabThreshold,
) -> FtlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FtlabStatus::NullPointer, "null output");
        }
        let builtin = paper_census();
        let set = census_ref(c, &builtin);
        match asymptotic_threshold(Ratios::new(ratios.rm, ratios.rr, ratios.tr), set) {
            Ok(r) => {
                *out = (&r).into();
                FtlabStatus::Ok
            }
            Err(e) => solver_status(e),
        }
    })
}

/// Gadget failure probabilities at `level` for gate failure rate `p0s`.
///
/// # Safety
/// `c` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ftlab_gadget_failures(
    c: *const FtlabCensus,
    ratios: FtlabRatios,
    p0s: f64,
    level: u32,
    out: *mut FtlabFailures,
) -> FtlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FtlabStatus::NullPointer, "null output");
        }
        let builtin = paper_census();
        let set = census_ref(c, &builtin);
        let setting = match Ratios::new(ratios.rm, ratios.rr, ratios.tr).setting(p0s) {
            Ok(s) => s,
            Err(e) => return fail(FtlabStatus::InvalidArgument, e.to_string()),
        };
        match recurse_failures(&setting, set, level) {
            Ok(v) => {
                *out = FtlabFailures {
                    level: v.level,
                    probs: v.probs.0,
                };
                FtlabStatus::Ok
            }
            Err(e) => fail(FtlabStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Single-fault verification of a component named like the CLI's
/// `--component`. Returns `VerifyFailed` when some fault fails; the summary
/// is filled in either way.
///
/// # Safety
/// `component` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ftlab_verify(
    component: *const c_char,
    granularity: FtlabGranularity,
    out: *mut FtlabVerifySummary,
) -> FtlabStatus {
    guarded(|| {
        if component.is_null() || out.is_null() {
            return fail(FtlabStatus::NullPointer, "null argument");
        }
        let Some(comp) = CStr::from_ptr(component)
            .to_str()
            .ok()
            .and_then(|s| s.parse::<Component>().ok())
        else {
            return fail(FtlabStatus::InvalidArgument, "unknown component");
        };
        let gran = match granularity {
            FtlabGranularity::Logical => Granularity::Logical,
            FtlabGranularity::Physical => Granularity::Physical,
        };
        let report = match verify_component(comp, gran) {
            Ok(r) => r,
            Err(e) => return fail(FtlabStatus::InvalidArgument, e.to_string()),
        };
        let s = &report.summary;
        *out = FtlabVerifySummary {
            faults: s.faults as u64,
            failure_count: s.failure_count as u64,
            max_weight: s.max_weight as u32,
            conflicts: s.conflicts as u64,
            unknown_patterns: s.unknown_patterns as u64,
            pass: report.pass(),
        };
        if report.pass() {
            FtlabStatus::Ok
        } else {
            fail(
                FtlabStatus::VerifyFailed,
                format!("{}: {} failing fault(s)", comp, s.failure_count),
            )
        }
    })
}
