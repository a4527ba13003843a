//! C ABI for the geomech engine.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`GmStatus`]; the message of the most recent failure on the calling
//! thread is available from [`gm_last_error`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use geomech::cli::{self, Report, RunOptions, Status, SystemSpec};
use geomech::symexpr::{self, Equality, EvalPoint, Expr, SampleConfig, Scope};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EvalError = 4,
    SpecError = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Outcome of a probabilistic equality test.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmEquality {
    NotEqual = 0,
    Equal = 1,
    Undecided = 2,
}

/// Status of one report record.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmCheckStatus {
    Pass = 0,
    Fail = 1,
    Degenerate = 2,
    Undecided = 3,
}

/// A symbolic expression.
pub struct GmExpr(Expr);

/// A parsed and resolved specification.
pub struct GmSpec(SystemSpec);

/// The result of running a specification.
pub struct GmReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: GmStatus, msg: impl Into<String>) -> GmStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`GmStatus::Panic`].
fn guard(f: impl FnOnce() -> GmStatus) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(GmStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, GmStatus> {
    if p.is_null() {
        return Err(fail(GmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(GmStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn names(csv: &str) -> Vec<String> {
    csv.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            return fail(GmStatus::NullPointer, "null pointer argument");
        }
    };
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `text` with the comma-separated `symbols` and `functions` in
/// scope (`functions` may be NULL).
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_expr_parse(
    text: *const c_char,
    symbols: *const c_char,
    functions: *const c_char,
    out: *mut *mut GmExpr,
) -> GmStatus {
    guard(|| {
        non_null!(out);
        let text = tri!(str_arg(text));
        let syms = names(tri!(str_arg(symbols)));
        let fns = if functions.is_null() { Vec::new() } else { names(tri!(str_arg(functions))) };
        match symexpr::parse(text, &Scope::new(&syms).with_functions(&fns)) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(GmExpr(e)));
                GmStatus::Ok
            }
            Err(e) => fail(GmStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `e` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gm_expr_free(e: *mut GmExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Printed form; free with [`gm_string_free`]. NULL on a NULL handle.
///
/// # Safety
/// `e` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_expr_to_string(e: *const GmExpr) -> *mut c_char {
    match e.as_ref() {
        Some(e) => into_c_string(e.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// `∂e/∂var` as a new handle.
///
/// # Safety
/// `e` must be a live handle, `var` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_expr_differentiate(e: *const GmExpr, var: *const c_char, out: *mut *mut GmExpr) -> GmStatus {
    guard(|| {
        non_null!(e, out);
        let var = tri!(str_arg(var));
        *out = Box::into_raw(Box::new(GmExpr((&*e).0.differentiate(var))));
        GmStatus::Ok
    })
}

/// Evaluates `e` at `names[i] = values[i]`. Opaque functions use the
/// generic sampling bodies.
///
/// # Safety
/// `names` and `values` must hold `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_expr_eval(
    e: *const GmExpr,
    names: *const *const c_char,
    values: *const c_double,
    n: usize,
    out: *mut c_double,
) -> GmStatus {
    guard(|| {
        non_null!(e, out);
        if n > 0 {
            non_null!(names, values);
        }
        let mut p = EvalPoint::default();
        for i in 0..n {
            let name = tri!(str_arg(*names.add(i)));
            p.values.insert(name.to_string(), *values.add(i));
        }
        match (&*e).0.eval_with(&p, &symexpr::FunctionEnv::generic()) {
            Ok(v) => {
                *out = v;
                GmStatus::Ok
            }
            Err(err) => fail(GmStatus::EvalError, err.to_string()),
        }
    })
}

/// Probabilistic equality with `samples` points drawn from `seed`
/// (`samples = 0` selects the default of 16).
///
/// # Safety
/// `a` and `b` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_expr_equal(
    a: *const GmExpr,
    b: *const GmExpr,
    seed: u64,
    samples: usize,
    tol: c_double,
    out: *mut GmEquality,
) -> GmStatus {
    guard(|| {
        non_null!(a, b, out);
        let mut cfg = SampleConfig::default().with_seed(seed);
        if samples > 0 {
            cfg = cfg.with_samples(samples);
        }
        if tol > 0.0 {
            cfg = cfg.with_tol(tol);
        }
        *out = match symexpr::equal(&(&*a).0, &(&*b).0, &cfg) {
            Equality::Equal => GmEquality::Equal,
            Equality::NotEqual(_) => GmEquality::NotEqual,
            Equality::Undecided => GmEquality::Undecided,
        };
        GmStatus::Ok
    })
}

/// Parses a specification from its text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_spec_parse(text: *const c_char, out: *mut *mut GmSpec) -> GmStatus {
    guard(|| {
        non_null!(out);
        match cli::parse_spec(tri!(str_arg(text))) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(GmSpec(s)));
                GmStatus::Ok
            }
            Err(e) => fail(GmStatus::SpecError, e.to_string()),
        }
    })
}

/// Loads a specification file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_spec_load(path: *const c_char, out: *mut *mut GmSpec) -> GmStatus {
    guard(|| {
        non_null!(out);
        match cli::load_spec(std::path::Path::new(tri!(str_arg(path)))) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(GmSpec(s)));
                GmStatus::Ok
            }
            Err(e) => fail(GmStatus::SpecError, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gm_spec_free(s: *mut GmSpec) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of checks declared in the specification, or 0 for NULL.
///
/// # Safety
/// `s` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_spec_check_count(s: *const GmSpec) -> usize {
    s.as_ref().map_or(0, |s| s.0.checks.len())
}

/// Runs the checks listed in the comma-separated `only` (NULL for all).
/// `samples = 0` and `tol <= 0` select the defaults.
///
/// # Safety
/// `s` must be a live handle; `only` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_spec_run(
    s: *const GmSpec,
    only: *const c_char,
    seed: u64,
    samples: usize,
    tol: c_double,
    out: *mut *mut GmReport,
) -> GmStatus {
    guard(|| {
        non_null!(s, out);
        let ids = if only.is_null() { None } else { Some(names(tri!(str_arg(only)))) };
        let defaults = RunOptions::default();
        let opts = RunOptions {
            seed,
            samples: if samples > 0 { samples } else { defaults.samples },
            tol: if tol > 0.0 { tol } else { defaults.tol },
            ..defaults
        };
        match cli::run(&(&*s).0, ids.as_deref(), &opts) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(GmReport(r)));
                GmStatus::Ok
            }
            Err(e) => fail(GmStatus::SpecError, e.to_string()),
        }
    })
}

/// # Safety
/// `r` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gm_report_free(r: *mut GmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of records, or 0 for NULL.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_report_len(r: *const GmReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.records.len())
}

/// 1 when every record passed, 0 otherwise (including NULL).
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_report_all_pass(r: *const GmReport) -> c_int {
    r.as_ref().is_some_and(|r| r.0.all_pass()).into()
}

/// Status of record `i`.
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_report_status(r: *const GmReport, i: usize, out: *mut GmCheckStatus) -> GmStatus {
    guard(|| {
        non_null!(r, out);
        let r = &*r;
        let Some(rec) = r.0.records.get(i) else {
            return fail(GmStatus::OutOfRange, format!("record {i} out of range"));
        };
        *out = match rec.status {
            Status::Pass => GmCheckStatus::Pass,
            Status::Fail => GmCheckStatus::Fail,
            Status::Degenerate => GmCheckStatus::Degenerate,
            Status::Undecided => GmCheckStatus::Undecided,
        };
        GmStatus::Ok
    })
}

/// Id of record `i`; free with [`gm_string_free`]. NULL when out of range.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_report_id(r: *const GmReport, i: usize) -> *mut c_char {
    r.as_ref().and_then(|r| r.0.records.get(i)).map_or(ptr::null_mut(), |rec| into_c_string(rec.id.clone()))
}

/// Witness coordinate `name` of record `i`, if the record has one.
///
/// # Safety
/// `r` must be a live handle; `name` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_report_witness(r: *const GmReport, i: usize, name: *const c_char, out: *mut c_double) -> GmStatus {
    guard(|| {
        non_null!(r, out);
        let name = tri!(str_arg(name));
        let r = &*r;
        let w: Option<&BTreeMap<String, f64>> = r.0.records.get(i).and_then(|rec| rec.witness.as_ref());
        match w.and_then(|w| w.get(name)) {
            Some(v) => {
                *out = *v;
                GmStatus::Ok
            }
            None => fail(GmStatus::OutOfRange, format!("record {i} has no witness value for {name}")),
        }
    })
}

/// The whole report as JSONL; free with [`gm_string_free`].
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_report_jsonl(r: *const GmReport) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| into_c_string(r.0.to_jsonl()))
}
