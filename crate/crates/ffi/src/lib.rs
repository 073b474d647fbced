//! C ABI for the qchain-sim scenario runner.
//!
//! The surface is a thin handle-based wrapper: run a scenario from a JSON
//! config string, query the resulting report (JSON, text, pass/fail), and
//! free what you were given. A few pure helpers (SHA-256, Grover schedule
//! math, the fork-race closed form) are exposed directly for callers that
//! only need numbers.
//!
//! Conventions:
//!
//! * Functions returning [`QchainStatus`] report failure through the status
//!   code; `qchain_last_error` returns a thread-local message for the most
//!   recent failure on the calling thread.
//! * Any pointer handed out by this library must be released with the
//!   matching `qchain_*_free` function, and only that.
//! * Scenario expectation failures are not errors: the run succeeds and
//!   `qchain_report_passed` reports false (mirroring the CLI's exit code 3).
//!
//! The C header `include/qchain.h` is generated from these declarations at
//! build time by cbindgen.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qchain_sim::report::{emit, Report, ReportFormat, ScenarioConfig};
use qchain_sim::scenario::run_scenario;

/// Result codes for fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QchainStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The config failed to parse or violated a precondition.
    InvalidConfig = 3,
    /// Invariant failure inside the library.
    Internal = 4,
}

/// Opaque scenario report handle.
pub struct QchainReport {
    inner: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn qchain_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static null-terminated string; do not free.
#[no_mangle]
pub extern "C" fn qchain_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Run a scenario described by a JSON config document.
///
/// On `Ok`, `*out_report` owns the report and must be released with
/// `qchain_report_free`. On any other status, `*out_report` is set to null
/// and `qchain_last_error` describes the problem.
///
/// # Safety
/// `config_json` must point to a null-terminated string and `out_report`
/// to writable pointer storage; both must stay valid for the call.
#[no_mangle]
pub unsafe extern "C" fn qchain_run_scenario(
    config_json: *const c_char,
    out_report: *mut *mut QchainReport,
) -> QchainStatus {
    if out_report.is_null() {
        set_last_error("out_report is null");
        return QchainStatus::NullPointer;
    }
    unsafe { *out_report = ptr::null_mut() };
    if config_json.is_null() {
        set_last_error("config_json is null");
        return QchainStatus::NullPointer;
    }
    let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
        Ok(text) => text,
        Err(_) => {
            set_last_error("config_json is not valid UTF-8");
            return QchainStatus::InvalidUtf8;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let config = ScenarioConfig::from_json(text)?;
        run_scenario(&config)
    }));
    match outcome {
        Ok(Ok(report)) => {
            unsafe { *out_report = Box::into_raw(Box::new(QchainReport { inner: report })) };
            QchainStatus::Ok
        }
        Ok(Err(err)) => {
            set_last_error(&err.to_string());
            QchainStatus::InvalidConfig
        }
        Err(_) => {
            set_last_error("internal panic while running the scenario");
            QchainStatus::Internal
        }
    }
}

unsafe fn emit_report(
    report: *const QchainReport,
    format: ReportFormat,
    out_str: *mut *mut c_char,
) -> QchainStatus {
    if report.is_null() || out_str.is_null() {
        set_last_error("null pointer argument");
        return QchainStatus::NullPointer;
    }
    let bytes = emit(&unsafe { &*report }.inner, format);
    match CString::new(bytes) {
        Ok(cstring) => {
            unsafe { *out_str = cstring.into_raw() };
            QchainStatus::Ok
        }
        Err(_) => {
            set_last_error("emitted report contained an interior NUL byte");
            QchainStatus::Internal
        }
    }
}

/// Canonical JSON encoding of a report; release with `qchain_string_free`.
///
/// # Safety
/// `report` must be a live handle from `qchain_run_scenario` and `out_str`
/// writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn qchain_report_json(
    report: *const QchainReport,
    out_str: *mut *mut c_char,
) -> QchainStatus {
    unsafe { emit_report(report, ReportFormat::Json, out_str) }
}

/// Human-readable table encoding; release with `qchain_string_free`.
///
/// # Safety
/// Same contract as [`qchain_report_json`].
#[no_mangle]
pub unsafe extern "C" fn qchain_report_text(
    report: *const QchainReport,
    out_str: *mut *mut c_char,
) -> QchainStatus {
    unsafe { emit_report(report, ReportFormat::Text, out_str) }
}

/// Whether every built-in expectation held for this run.
///
/// # Safety
/// `report` must be a live handle and `out_passed` writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_report_passed(
    report: *const QchainReport,
    out_passed: *mut bool,
) -> QchainStatus {
    if report.is_null() || out_passed.is_null() {
        set_last_error("null pointer argument");
        return QchainStatus::NullPointer;
    }
    unsafe { *out_passed = (*report).inner.passed };
    QchainStatus::Ok
}

/// Release a report handle. Null is ignored.
///
/// # Safety
/// `report` must come from `qchain_run_scenario` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qchain_report_free(report: *mut QchainReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Release a string produced by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a `qchain_*` function that transfers string ownership.
#[no_mangle]
pub unsafe extern "C" fn qchain_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// SHA-256 of `len` bytes at `data` into the 32-byte buffer `out_digest`.
///
/// # Safety
/// `data` must be readable for `len` bytes (null is allowed when `len` is 0)
/// and `out_digest` writable for 32 bytes.
#[no_mangle]
pub unsafe extern "C" fn qchain_sha256(
    data: *const u8,
    len: usize,
    out_digest: *mut u8,
) -> QchainStatus {
    if out_digest.is_null() || (data.is_null() && len > 0) {
        set_last_error("null pointer argument");
        return QchainStatus::NullPointer;
    }
    let bytes = if len == 0 {
        &[]
    } else {
        unsafe { std::slice::from_raw_parts(data, len) }
    };
    let digest = qchain_sim::chain::sha256(bytes);
    unsafe { ptr::copy_nonoverlapping(digest.as_bytes().as_ptr(), out_digest, 32) };
    QchainStatus::Ok
}

/// Closed-form probability that an attacker with power share `attacker_share`
/// erases a `deficit`-block head start. NaN when the share is outside (0, 1).
#[no_mangle]
pub extern "C" fn qchain_catchup_probability(attacker_share: f64, deficit: u32) -> f64 {
    if !(attacker_share > 0.0 && attacker_share < 1.0) {
        return f64::NAN;
    }
    qchain_sim::adversary::catchup_probability(attacker_share, deficit)
}

/// Grover success probability `sin^2((2k+1) * asin(sqrt(M/N)))`. NaN unless
/// `1 <= marked <= space`.
#[no_mangle]
pub extern "C" fn qchain_grover_success_probability(
    space: u64,
    marked: u64,
    iterations: u64,
) -> f64 {
    if marked == 0 || marked > space {
        return f64::NAN;
    }
    qchain_sim::qsim::grover_success_probability(space, marked, iterations)
}

/// Optimal Grover iteration count for `marked` solutions among `space`
/// indices. `UINT64_MAX` unless `1 <= marked <= space`.
#[no_mangle]
pub extern "C" fn qchain_grover_optimal_iterations(space: u64, marked: u64) -> u64 {
    if marked == 0 || marked > space {
        return u64::MAX;
    }
    qchain_sim::qsim::optimal_iterations(space, marked)
}
