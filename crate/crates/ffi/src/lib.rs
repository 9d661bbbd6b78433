//! C interface to the wce-maxwell solvers.
//!
//! Every fallible function returns a [`WceStatus`]. On failure a description is
//! available from [`wce_last_error_message`] on the same thread. Handles are
//! opaque and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use wce_maxwell::chaos::{hermite, truncation_count};
use wce_maxwell::harness::{
    compute_report, parse_config, run_experiment, to_json, ExperimentConfig, HarnessError, Mode, RunReport,
};
use wce_maxwell::statistics::relative_error_frobenius;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    SolverError = 4,
    IoError = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Parsed experiment configuration.
pub struct WceConfig(ExperimentConfig);

/// Results of a run.
pub struct WceReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (WceStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            WceStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            WceStatus::Panic
        }
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    let status = match e {
        HarnessError::Config(_) => WceStatus::ConfigError,
        HarnessError::Io { .. } => WceStatus::IoError,
        _ => WceStatus::SolverError,
    };
    (status, e.to_string())
}

fn null(name: &str) -> Failure {
    (WceStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (WceStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul removed").into_raw()
}

/// Message describing the last failure on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wce_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a configuration document into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_config_parse(text: *const c_char, out: *mut *mut WceConfig) -> WceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let doc = c_str(text, "text")?;
        let config = parse_config(doc).map_err(harness_failure)?;
        *out = Box::into_raw(Box::new(WceConfig(config)));
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`wce_config_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wce_config_free(config: *mut WceConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle and `dir` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wce_config_set_output(config: *mut WceConfig, dir: *const c_char) -> WceStatus {
    guard(|| {
        let c = out_ref(config, "config")?;
        c.0.output = PathBuf::from(c_str(dir, "dir")?);
        Ok(())
    })
}

/// Sets the estimator selection to `"wce"`, `"mc"` or `"both"`.
///
/// # Safety
/// `config` must be a live handle and `mode` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wce_config_set_mode(config: *mut WceConfig, mode: *const c_char) -> WceStatus {
    guard(|| {
        let c = out_ref(config, "config")?;
        let m: Mode = c_str(mode, "mode")?.parse().map_err(|e| (WceStatus::InvalidArgument, e))?;
        if m == Mode::Both && c.0.mc.samples < 2 {
            return Err((WceStatus::ConfigError, "`mc_samples`: mode both needs at least 2 samples".into()));
        }
        c.0.mode = m;
        Ok(())
    })
}

/// Worker threads for subsequent runs; 0 uses every core.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wce_config_set_workers(config: *mut WceConfig, workers: usize) -> WceStatus {
    guard(|| {
        out_ref(config, "config")?.0.workers = workers;
        Ok(())
    })
}

/// Fully explicit configuration document; release with [`wce_string_free`].
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_config_to_toml(config: *const WceConfig, out: *mut *mut c_char) -> WceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        *out = to_c_string(c.0.to_toml());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wce_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn run_with(
    config: *const WceConfig,
    out: *mut *mut WceReport,
    f: fn(&ExperimentConfig) -> Result<RunReport, HarnessError>,
) -> WceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let report = f(&c.0).map_err(harness_failure)?;
        *out = Box::into_raw(Box::new(WceReport(report)));
        Ok(())
    })
}

/// Runs the experiment and writes its outputs to the configured directory.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_run(config: *const WceConfig, out: *mut *mut WceReport) -> WceStatus {
    run_with(config, out, run_experiment)
}

/// Runs the experiment without writing any files.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_compute(config: *const WceConfig, out: *mut *mut WceReport) -> WceStatus {
    run_with(config, out, compute_report)
}

/// # Safety
/// `report` must come from [`wce_run`] or [`wce_compute`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wce_report_free(report: *mut WceReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of time levels in the energy series.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_report_energy_len(report: *const WceReport, out: *mut usize) -> WceStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out_ref(out, "out")? = r.0.energy.times.len();
        Ok(())
    })
}

/// Time level `n` of the energy series. Estimators that did not run read NaN.
/// Any output pointer may be null.
///
/// # Safety
/// `report` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn wce_report_energy(
    report: *const WceReport,
    n: usize,
    t: *mut f64,
    wce: *mut f64,
    mc: *mut f64,
    reference: *mut f64,
) -> WceStatus {
    guard(|| {
        let e = &report.as_ref().ok_or_else(|| null("report"))?.0.energy;
        if n >= e.times.len() {
            return Err((WceStatus::OutOfRange, format!("time level {n} of {}", e.times.len())));
        }
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map_or(f64::NAN, |v| v[n]);
        for (p, v) in [(t, e.times[n]), (wce, pick(&e.wce)), (mc, pick(&e.mc)), (reference, e.reference[n])] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Relative Frobenius error of moment `order` (1-4) of `component`.
/// Writes NaN when the sampled reference is identically zero.
///
/// # Safety
/// `report` must be a live handle, `component` a valid string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_report_error(
    report: *const WceReport,
    component: *const c_char,
    order: u32,
    out: *mut f64,
) -> WceStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let name = c_str(component, "component")?;
        let out = out_ref(out, "out")?;
        let table = r
            .errors
            .as_ref()
            .ok_or_else(|| (WceStatus::OutOfRange, "report has no error table (mode is not both)".to_string()))?;
        let entry = table
            .iter()
            .find(|e| e.component == name && e.order == order)
            .ok_or_else(|| (WceStatus::OutOfRange, format!("no error entry for {name} moment {order}")))?;
        *out = entry.relative_error.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Wall-clock seconds of the WCE and MC phases; NaN for phases that did not run.
///
/// # Safety
/// `report` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn wce_report_timings(
    report: *const WceReport,
    wce_seconds: *mut f64,
    mc_seconds: *mut f64,
) -> WceStatus {
    guard(|| {
        let t = &report.as_ref().ok_or_else(|| null("report"))?.0.timings;
        if let Some(p) = wce_seconds.as_mut() {
            *p = t.wce_seconds.unwrap_or(f64::NAN);
        }
        if let Some(p) = mc_seconds.as_mut() {
            *p = t.mc_seconds.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// The report as JSON; release with [`wce_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_report_to_json(report: *const WceReport, out: *mut *mut c_char) -> WceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out = to_c_string(to_json(&r.0));
        Ok(())
    })
}

/// Probabilists' Hermite polynomial `He_n(x)`.
#[no_mangle]
pub extern "C" fn wce_hermite(n: u32, x: f64) -> f64 {
    hermite(n, x)
}

/// Size of the truncated multi-index set for `num_wiener` channels, order `max_order`
/// and `max_basis` basis functions.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_truncation_size(
    num_wiener: u32,
    max_order: u32,
    max_basis: u32,
    out: *mut usize,
) -> WceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if num_wiener == 0 || max_basis == 0 {
            return Err((WceStatus::InvalidArgument, "channel and basis counts must be positive".into()));
        }
        *out = truncation_count(num_wiener as u64 * max_basis as u64, max_order as u64)
            .ok_or_else(|| (WceStatus::OutOfRange, "truncation size overflows".to_string()))?;
        Ok(())
    })
}

/// `||candidate - reference|| / ||reference||` over `len` values.
///
/// # Safety
/// Both arrays must hold `len` values; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wce_relative_error_frobenius(
    candidate: *const f64,
    reference: *const f64,
    len: usize,
    out: *mut f64,
) -> WceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if len > 0 && (candidate.is_null() || reference.is_null()) {
            return Err(null(if candidate.is_null() { "candidate" } else { "reference" }));
        }
        let (a, b) = if len == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(candidate, len), std::slice::from_raw_parts(reference, len))
        };
        *out = relative_error_frobenius(a, b).map_err(|e| (WceStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}
