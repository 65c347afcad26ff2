//! C ABI for the surfnet pipeline.
//!
//! Handles are opaque pointers owned by Rust; every `*_new`-style call has
//! a matching `*_free`. Functions return [`SurfnetStatus`]; on any failure
//! a thread-local message is retrievable with
//! [`surfnet_last_error_message`]. Undefined index ratios come back as NaN.
//! All entry points catch panics so no unwinding crosses the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use libc::c_char;

use surfnet::chart::emit_charts;
use surfnet::config::PipelineConfig;
use surfnet::error::SurfnetError;
use surfnet::pipeline::{run_pipeline, run_sweep, RunOutput};

/// Result code of every fallible call. Values above `OK` mirror the CLI
/// exit codes where one exists.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfnetStatus {
    Ok = 0,
    /// Null pointer, non-UTF-8 string, or out-of-range index.
    InvalidArgument = 1,
    /// Input could not be read or parsed.
    Input = 2,
    /// Configuration is invalid.
    Config = 3,
    /// Internal invariant violation.
    Internal = 4,
    /// A panic was caught at the boundary.
    Panic = 5,
}

/// Per-window graph indices. Ratios that are undefined for the window
/// (zero denominators) are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SurfnetIndices {
    pub v: u64,
    pub e: u64,
    pub p: u64,
    pub l_km: f64,
    pub sa_km2: f64,
    pub mu: i64,
    pub euler_check: i64,
    pub nd: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub theta: f64,
}

/// Opaque handle to a completed pipeline run.
pub struct SurfnetRun {
    output: RunOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let stored = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &SurfnetError) -> SurfnetStatus {
    match err {
        SurfnetError::Io { .. } | SurfnetError::Parse(_) => SurfnetStatus::Input,
        SurfnetError::Config(_) | SurfnetError::InvalidInput(_) => SurfnetStatus::Config,
        SurfnetError::Internal(_) => SurfnetStatus::Internal,
    }
}

fn guarded(body: impl FnOnce() -> SurfnetStatus) -> SurfnetStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {message}"));
            SurfnetStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for the call.
unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, SurfnetStatus> {
    if ptr.is_null() {
        set_error("null path argument".into());
        return Err(SurfnetStatus::InvalidArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8".into());
            Err(SurfnetStatus::InvalidArgument)
        }
    }
}

fn alloc_string(s: &str) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Run the pipeline described by a TOML config file. On success writes a
/// new handle to `out_run`; free it with [`surfnet_run_free`].
///
/// # Safety
/// `config_path` must be a NUL-terminated string and `out_run` a valid
/// pointer-to-pointer; both must stay valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_config_file(
    config_path: *const c_char,
    out_run: *mut *mut SurfnetRun,
) -> SurfnetStatus {
    guarded(|| {
        if out_run.is_null() {
            set_error("null out_run".into());
            return SurfnetStatus::InvalidArgument;
        }
        let path = match path_arg(config_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match load_and_run(&path) {
            Ok(output) => {
                *out_run = Box::into_raw(Box::new(SurfnetRun { output }));
                SurfnetStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

fn load_and_run(path: &Path) -> Result<RunOutput, SurfnetError> {
    let config = PipelineConfig::from_toml_file(path)?;
    run_pipeline(&config)
}

/// Run the bandwidth sweep described by a TOML config file. On success,
/// optionally returns the summary CSV path via `out_summary_path` (free
/// with [`surfnet_string_free`]).
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_summary_path` may
/// be null or must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn surfnet_sweep_config_file(
    config_path: *const c_char,
    out_summary_path: *mut *mut c_char,
) -> SurfnetStatus {
    guarded(|| {
        let path = match path_arg(config_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let result = PipelineConfig::from_toml_file(&path).and_then(|config| run_sweep(&config));
        match result {
            Ok(output) => {
                if !out_summary_path.is_null() {
                    *out_summary_path = alloc_string(&output.summary_path.to_string_lossy());
                }
                SurfnetStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Render the complexity and connectivity SVG panels from an indices CSV.
///
/// # Safety
/// Both arguments must be NUL-terminated strings valid for the call.
#[no_mangle]
pub unsafe extern "C" fn surfnet_chart_csv(
    indices_csv_path: *const c_char,
    out_dir: *const c_char,
) -> SurfnetStatus {
    guarded(|| {
        let csv = match path_arg(indices_csv_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let dir = match path_arg(out_dir) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match emit_charts(&csv, &dir) {
            Ok(_) => SurfnetStatus::Ok,
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of regions in a completed run; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a handle from [`surfnet_run_config_file`].
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_region_count(run: *const SurfnetRun) -> usize {
    if run.is_null() {
        return 0;
    }
    let run = &*run;
    run.output.regions.len()
}

/// Name of one region as a newly allocated string (free with
/// [`surfnet_string_free`]); null when out of range.
///
/// # Safety
/// `run` must be null or a handle from [`surfnet_run_config_file`].
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_region_name(
    run: *const SurfnetRun,
    region_index: usize,
) -> *mut c_char {
    if run.is_null() {
        return std::ptr::null_mut();
    }
    let run = &*run;
    match run.output.regions.get(region_index) {
        Some(region) => alloc_string(&region.name),
        None => std::ptr::null_mut(),
    }
}

/// Number of time windows in one region of a completed run.
///
/// # Safety
/// `run` must be null or a handle from [`surfnet_run_config_file`].
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_window_count(
    run: *const SurfnetRun,
    region_index: usize,
) -> usize {
    if run.is_null() {
        return 0;
    }
    let run = &*run;
    run.output
        .regions
        .get(region_index)
        .map_or(0, |r| r.rows.len())
}

/// Graph indices of one window. Undefined ratios are NaN.
///
/// # Safety
/// `run` must be a handle from [`surfnet_run_config_file`] and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_indices(
    run: *const SurfnetRun,
    region_index: usize,
    window_index: usize,
    out: *mut SurfnetIndices,
) -> SurfnetStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            set_error("null handle or out pointer".into());
            return SurfnetStatus::InvalidArgument;
        }
        let run = &*run;
        let row = run
            .output
            .regions
            .get(region_index)
            .and_then(|r| r.rows.get(window_index));
        let Some(row) = row else {
            set_error(format!(
                "no window {window_index} in region {region_index}"
            ));
            return SurfnetStatus::InvalidArgument;
        };
        let x = &row.indices;
        let undef = f64::NAN;
        *out = SurfnetIndices {
            v: x.v as u64,
            e: x.e as u64,
            p: x.p as u64,
            l_km: x.l_km,
            sa_km2: x.sa_km2,
            mu: x.mu,
            euler_check: row.euler_check,
            nd: x.nd.unwrap_or(undef),
            alpha: x.alpha.unwrap_or(undef),
            beta: x.beta.unwrap_or(undef),
            gamma: x.gamma.unwrap_or(undef),
            eta: x.eta.unwrap_or(undef),
            theta: x.theta.unwrap_or(undef),
        };
        SurfnetStatus::Ok
    })
}

/// Path of the run manifest as a newly allocated string (free with
/// [`surfnet_string_free`]); null for a null handle.
///
/// # Safety
/// `run` must be null or a handle from [`surfnet_run_config_file`].
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_manifest_path(run: *const SurfnetRun) -> *mut c_char {
    if run.is_null() {
        return std::ptr::null_mut();
    }
    let run = &*run;
    alloc_string(&run.output.manifest_path.to_string_lossy())
}

/// Free a run handle. Null is a no-op.
///
/// # Safety
/// `run` must be null or a handle from [`surfnet_run_config_file`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn surfnet_run_free(run: *mut SurfnetRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Free a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string allocated by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn surfnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last error on this thread as a newly allocated string
/// (free with [`surfnet_string_free`]); null when the last call succeeded.
#[no_mangle]
pub extern "C" fn surfnet_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => alloc_string(message.to_str().unwrap_or("invalid error")),
        None => std::ptr::null_mut(),
    })
}
