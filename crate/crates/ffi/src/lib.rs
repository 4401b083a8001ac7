//! C ABI over `lqg-growth`.
//!
//! Handles are opaque pointers created by `*_new`/`lqg_run` and released by
//! the matching `*_free`. Every fallible call returns an [`LqgStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`lqg_last_error`]. Panics are caught at the boundary and reported as
//! [`LqgStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use lqg_growth::cli::{self, ExperimentConfig, Report, SuiteOutput};
use lqg_growth::generator::pure_gravity_solve;
use lqg_growth::gmc::mass_moments;
use lqg_growth::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownSuite = 3,
    Config = 4,
    Numerical = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Configuration of one suite run.
pub struct LqgConfig {
    inner: ExperimentConfig,
}

/// Result of a suite run.
pub struct LqgReport {
    report: Report,
    output: SuiteOutput,
    ids: Vec<CString>,
}

/// Numeric part of one check. `stderr` is NaN for deterministic checks.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LqgCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Pure-gravity constants.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LqgPureGravity {
    pub gamma: f64,
    pub d_gamma: f64,
    pub xi: f64,
    pub q: f64,
    pub two_pi_c: f64,
}

/// Monte Carlo estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LqgEstimate {
    pub mean: f64,
    pub stderr: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LqgStatus {
    match e {
        Error::UnknownSuite(_) => LqgStatus::UnknownSuite,
        Error::Config(_) => LqgStatus::Config,
        Error::Io(_) | Error::Json(_) => LqgStatus::Io,
        _ => LqgStatus::Numerical,
    }
}

/// Run `f`, converting errors and panics into a status.
fn guarded(f: impl FnOnce() -> Result<(), (LqgStatus, String)>) -> LqgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LqgStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            LqgStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (LqgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LqgStatus, String) {
    (LqgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LqgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LqgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lqg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default configuration of `suite`, written to `*out`.
///
/// # Safety
/// `suite` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lqg_config_new(suite: *const c_char, seed: u64, out: *mut *mut LqgConfig) -> LqgStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let suite = read_str(suite, "suite")?;
        let inner = ExperimentConfig::defaults(suite, seed, PathBuf::new()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LqgConfig { inner }));
        Ok(())
    })
}

/// Apply one `key = value` override; the configuration is left unchanged on error.
///
/// # Safety
/// `cfg` must come from [`lqg_config_new`]; `key` and `value` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn lqg_config_set(cfg: *mut LqgConfig, key: *const c_char, value: *const c_char) -> LqgStatus {
    guarded(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let (k, v) = (read_str(key, "key")?, read_str(value, "value")?);
        let mut next = cfg.inner.clone();
        next.apply([(k, v)]).map_err(lib_err)?;
        cfg.inner = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`lqg_config_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_config_free(cfg: *mut LqgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run the configured suite.
///
/// # Safety
/// `cfg` must come from [`lqg_config_new`] and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lqg_run(cfg: *const LqgConfig, out: *mut *mut LqgReport) -> LqgStatus {
    guarded(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (report, output) = cli::run(&cfg.inner).map_err(lib_err)?;
        let ids = report.checks.iter().map(|c| CString::new(c.id.as_str()).expect("ids are ASCII")).collect();
        *out = Box::into_raw(Box::new(LqgReport { report, output, ids }));
        Ok(())
    })
}

/// # Safety
/// `rep` must come from [`lqg_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_free(rep: *mut LqgReport) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Whether every check passed; false for a null handle.
///
/// # Safety
/// `rep` must come from [`lqg_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_passed(rep: *const LqgReport) -> bool {
    rep.as_ref().is_some_and(|r| r.report.passed)
}

/// Number of checks; 0 for a null handle.
///
/// # Safety
/// `rep` must come from [`lqg_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_check_count(rep: *const LqgReport) -> usize {
    rep.as_ref().map_or(0, |r| r.report.checks.len())
}

/// Numbers of check `index`.
///
/// # Safety
/// `rep` must come from [`lqg_run`] and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_check(rep: *const LqgReport, index: usize, out: *mut LqgCheck) -> LqgStatus {
    guarded(|| {
        let r = rep.as_ref().ok_or_else(|| null("rep"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = r.report.checks.get(index).ok_or_else(|| {
            (LqgStatus::OutOfRange, format!("check {index} of {}", r.report.checks.len()))
        })?;
        *out = LqgCheck { lhs: c.lhs, rhs: c.rhs, stderr: c.stderr.unwrap_or(f64::NAN), pass: c.pass };
        Ok(())
    })
}

/// Id of check `index`, owned by the report; null when out of range.
///
/// # Safety
/// `rep` must come from [`lqg_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_check_id(rep: *const LqgReport, index: usize) -> *const c_char {
    rep.as_ref().and_then(|r| r.ids.get(index)).map_or(ptr::null(), |c| c.as_ptr())
}

/// Report as JSON; release with [`lqg_string_free`].
///
/// # Safety
/// `rep` must come from [`lqg_run`] and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_json(rep: *const LqgReport, out: *mut *mut c_char) -> LqgStatus {
    guarded(|| {
        let r = rep.as_ref().ok_or_else(|| null("rep"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = r.report.to_json().map_err(lib_err)?;
        *out = CString::new(json).expect("JSON has no nul").into_raw();
        Ok(())
    })
}

/// Write `report.json` and the CSV series into `dir`.
///
/// # Safety
/// `rep` must come from [`lqg_run`]; `dir` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn lqg_report_write(rep: *const LqgReport, dir: *const c_char) -> LqgStatus {
    guarded(|| {
        let r = rep.as_ref().ok_or_else(|| null("rep"))?;
        let dir = read_str(dir, "dir")?;
        r.report.write(dir.as_ref(), &r.output).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Pure-gravity constants.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lqg_pure_gravity(out: *mut LqgPureGravity) -> LqgStatus {
    guarded(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let pg = pure_gravity_solve();
        *out = LqgPureGravity { gamma: pg.gamma, d_gamma: pg.d_gamma, xi: pg.xi, q: pg.q, two_pi_c: pg.two_pi_c };
        Ok(())
    })
}

/// First and second moments of the total chaos mass at degree `n` on `m` points.
///
/// # Safety
/// `first` and `second` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lqg_gmc_mass_moments(
    xi: f64,
    n: usize,
    m: usize,
    n_samples: usize,
    seed: u64,
    first: *mut LqgEstimate,
    second: *mut LqgEstimate,
) -> LqgStatus {
    guarded(|| {
        let first = first.as_mut().ok_or_else(|| null("first"))?;
        let second = second.as_mut().ok_or_else(|| null("second"))?;
        if !(xi > 0.0 && xi < 1.0) || n == 0 || m <= 2 * n || n_samples < 2 {
            return Err((LqgStatus::Config, format!("need 0 < xi < 1, 1 <= n, m > 2n, n_samples >= 2; got xi = {xi}, n = {n}, m = {m}, n_samples = {n_samples}")));
        }
        let (a, b) = mass_moments(xi, n, m, n_samples, seed);
        *first = LqgEstimate { mean: a.mean, stderr: a.stderr };
        *second = LqgEstimate { mean: b.mean, stderr: b.stderr };
        Ok(())
    })
}
