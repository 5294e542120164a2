//! C ABI for the x3hd solver.
//!
//! Formulas and reports are opaque handles owned by the caller and released
//! with their `_free` function. Strings returned by this library are
//! NUL-terminated, heap-allocated and released with [`x3hd_string_free`].
//! A failing call returns a non-zero [`X3Status`]; the message for the most
//! recent failure on the calling thread is available from
//! [`x3hd_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use x3hd::toolkit::format::parse;
use x3hd::toolkit::report::report_json;
use x3hd::{solve, Formula, SolveError, SolveOptions, SolveReport};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum X3Status {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    MalformedFormula = 4,
    Internal = 5,
}

/// A parsed instance.
pub struct X3Formula {
    inner: Formula,
}

/// A solver result.
pub struct X3Report {
    inner: SolveReport,
}

/// Solver settings; obtain defaults from [`x3hd_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct X3Options {
    pub base_threshold: u32,
    pub seed: u64,
    pub parallel: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: X3Status, msg: impl Into<String>) -> X3Status {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> X3Status) -> X3Status {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(X3Status::Internal, "panic"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn x3hd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn x3hd_options_default() -> X3Options {
    let d = SolveOptions::default();
    X3Options {
        base_threshold: d.base_threshold as u32,
        seed: d.seed,
        parallel: d.parallel,
    }
}

/// Parses instance text (`p x3sat N M` format) into `*out`.
///
/// # Safety
/// `text` must be NULL or a valid NUL-terminated string; `out` must be NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn x3hd_formula_parse(
    text: *const c_char,
    out: *mut *mut X3Formula,
) -> X3Status {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return fail(X3Status::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(X3Status::InvalidUtf8, "input is not UTF-8");
        };
        match parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(X3Formula { inner }));
                X3Status::Ok
            }
            Err(e) => fail(X3Status::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `f` must be NULL or a handle from [`x3hd_formula_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn x3hd_formula_free(f: *mut X3Formula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn x3hd_formula_num_vars(f: *const X3Formula) -> u32 {
    f.as_ref().map_or(0, |f| f.inner.n_vars)
}

/// # Safety
/// `f` must be a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn x3hd_formula_num_clauses(f: *const X3Formula) -> usize {
    f.as_ref().map_or(0, |f| f.inner.clauses.len())
}

/// Solves `f`. `opts` may be NULL for defaults.
///
/// # Safety
/// `f` must be a live formula handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn x3hd_solve(
    f: *const X3Formula,
    opts: *const X3Options,
    out: *mut *mut X3Report,
) -> X3Status {
    guarded(|| {
        if f.is_null() || out.is_null() {
            return fail(X3Status::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let o = opts
            .as_ref()
            .copied()
            .unwrap_or_else(|| x3hd_options_default());
        let opts = SolveOptions {
            base_threshold: o.base_threshold as usize,
            seed: o.seed,
            parallel: o.parallel,
            ..SolveOptions::default()
        };
        match solve(&(*f).inner, &opts) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(X3Report { inner }));
                X3Status::Ok
            }
            Err(e @ SolveError::Malformed(_)) => fail(X3Status::MalformedFormula, e.to_string()),
            Err(e @ SolveError::Internal(_)) => fail(X3Status::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `r` must be NULL or a handle from [`x3hd_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn x3hd_report_free(r: *mut X3Report) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Largest Hamming distance between two solutions, or -1 when unsatisfiable.
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn x3hd_report_max_hd(r: *const X3Report) -> i64 {
    r.as_ref()
        .and_then(|r| r.inner.max_hd)
        .map_or(-1, i64::from)
}

/// Polynomial as text, e.g. `12*u^4 + 4`. Free with [`x3hd_string_free`].
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn x3hd_report_poly(r: *const X3Report) -> *mut c_char {
    r.as_ref()
        .map_or(ptr::null_mut(), |r| into_c_string(r.inner.poly.to_string()))
}

/// Number of solutions in decimal. Free with [`x3hd_string_free`].
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn x3hd_report_solutions(r: *const X3Report) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| {
        into_c_string(r.inner.solutions.to_string())
    })
}

/// Full report as JSON. Free with [`x3hd_string_free`].
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn x3hd_report_json(r: *const X3Report) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| {
        into_c_string(report_json(&r.inner).to_string())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn x3hd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
