//! C interface to `swnoether`: configuration and run handles, subcommand
//! entry points, integer status codes and a per-thread last-error message.
//!
//! Every function returns an [`SwStatus`] (or a sentinel) and never unwinds
//! across the boundary. Strings returned to the caller are freed with
//! [`sw_string_free`]; handles with their `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::{c_char, c_int, size_t};
use swnoether::cli::{execute, simulate, CliError, Command, RunConfig, RunResult};

/// Status codes shared by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    /// A checked verification did not hold.
    VerificationFailed = 1,
    /// Invalid configuration or argument.
    ConfigError = 2,
    /// Newton failure, singular Jacobian or folded element.
    SolverError = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    IoError = 6,
    NotFound = 7,
    Panic = 8,
}

/// Subcommands for [`sw_execute`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwCommand {
    Derive = 0,
    Check = 1,
    Run = 2,
    Converge = 3,
}

/// Opaque configuration handle.
pub struct SwConfig {
    inner: RunConfig,
}

/// Opaque handle to a finished run.
pub struct SwRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: SwStatus, msg: impl Into<String>) -> SwStatus {
    set_error(msg);
    status
}

fn from_cli(e: CliError) -> SwStatus {
    let status = match e {
        CliError::Config(_) => SwStatus::ConfigError,
        CliError::Solver(_) => SwStatus::SolverError,
        CliError::Io(_) => SwStatus::IoError,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`SwStatus::Panic`].
fn guard(f: impl FnOnce() -> SwStatus) -> SwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SwStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, SwStatus> {
    if s.is_null() {
        return Err(fail(SwStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(SwStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration with every default.
#[no_mangle]
pub extern "C" fn sw_config_default() -> *mut SwConfig {
    Box::into_raw(Box::new(SwConfig { inner: RunConfig::default() }))
}

/// Parses TOML text into `*out`. Relative paths resolve against the
/// working directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sw_config_from_toml(toml: *const c_char, out: *mut *mut SwConfig) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::parse(text, None) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(SwConfig { inner: c }));
                SwStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Loads a TOML file into `*out`; relative paths inside resolve against
/// the file's directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sw_config_load(path: *const c_char, out: *mut *mut SwConfig) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let p = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match RunConfig::load(Path::new(p)) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(SwConfig { inner: c }));
                SwStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Effective configuration as TOML; free with [`sw_string_free`]. Null on a
/// null handle.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_config_to_toml(config: *const SwConfig) -> *mut c_char {
    match config.as_ref() {
        Some(c) => into_c_string(c.inner.to_toml()),
        None => {
            set_error("config is null");
            ptr::null_mut()
        }
    }
}

/// Sets the output directory of `run` and `converge`.
///
/// # Safety
/// `config` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sw_config_set_output_dir(config: *mut SwConfig, dir: *const c_char) -> SwStatus {
    guard(|| {
        let Some(c) = config.as_mut() else { return fail(SwStatus::NullPointer, "config is null") };
        match read_str(dir, "dir") {
            Ok(d) => {
                c.inner.output.dir = d.to_string();
                SwStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Sets the mesh perturbation seed.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_config_set_seed(config: *mut SwConfig, seed: u64) -> SwStatus {
    guard(|| {
        let Some(c) = config.as_mut() else { return fail(SwStatus::NullPointer, "config is null") };
        c.inner.mesh.seed = seed;
        SwStatus::Ok
    })
}

/// Checks ranges and referenced files.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_config_validate(config: *const SwConfig) -> SwStatus {
    guard(|| {
        let Some(c) = config.as_ref() else { return fail(SwStatus::NullPointer, "config is null") };
        c.inner.validate().map_or_else(from_cli, |_| SwStatus::Ok)
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_config_free(config: *mut SwConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a subcommand. The text report goes to `*report` when `report` is
/// not null (free with [`sw_string_free`]). Returns `Ok`,
/// `VerificationFailed`, `ConfigError` or `SolverError` like the CLI exit
/// codes.
///
/// # Safety
/// `config` must be a live handle; `report` null or writable.
#[no_mangle]
pub unsafe extern "C" fn sw_execute(config: *const SwConfig, command: SwCommand, report: *mut *mut c_char) -> SwStatus {
    guard(|| {
        if !report.is_null() {
            *report = ptr::null_mut();
        }
        let Some(c) = config.as_ref() else { return fail(SwStatus::NullPointer, "config is null") };
        let cmd = match command {
            SwCommand::Derive => Command::Derive,
            SwCommand::Check => Command::Check,
            SwCommand::Run => Command::Run,
            SwCommand::Converge => Command::Converge,
        };
        let (text, code) = execute(cmd, &c.inner);
        let status = match code {
            0 => SwStatus::Ok,
            1 => SwStatus::VerificationFailed,
            3 => SwStatus::SolverError,
            _ => SwStatus::ConfigError,
        };
        if code >= 2 {
            set_error(text.trim_end());
        }
        if !report.is_null() {
            *report = into_c_string(text);
        }
        status
    })
}

/// Marches every slab without writing files and stores the result in `*out`.
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sw_run(config: *const SwConfig, out: *mut *mut SwRun) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(c) = config.as_ref() else { return fail(SwStatus::NullPointer, "config is null") };
        match simulate(&c.inner) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(SwRun { inner: r }));
                SwStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Number of time knots, slab ends included; 0 on a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_run_num_knots(run: *const SwRun) -> size_t {
    run.as_ref().map_or(0, |r| r.inner.problem.slabs.knots().len())
}

/// Number of tracked quantities; 0 on a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_run_num_quantities(run: *const SwRun) -> size_t {
    run.as_ref().map_or(0, |r| r.inner.report.series.len())
}

/// Name of quantity `i`, e.g. `energy` or `pv:hat(40)`; free with
/// [`sw_string_free`]. Null when out of range.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_run_quantity_name(run: *const SwRun, i: size_t) -> *mut c_char {
    match run.as_ref().and_then(|r| r.inner.report.series.get(i)) {
        Some((q, _)) => into_c_string(q.clone()),
        None => {
            set_error(format!("no quantity {i}"));
            ptr::null_mut()
        }
    }
}

/// Writes `∫ A^t` of `quantity` at `knot` to `*value`.
///
/// # Safety
/// `run` must be a live handle, `quantity` a NUL-terminated string and
/// `value` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_run_conserved(run: *const SwRun, quantity: *const c_char, knot: size_t, value: *mut f64) -> SwStatus {
    guard(|| {
        let Some(r) = run.as_ref() else { return fail(SwStatus::NullPointer, "run is null") };
        if value.is_null() {
            return fail(SwStatus::NullPointer, "value is null");
        }
        let q = match read_str(quantity, "quantity") {
            Ok(q) => q,
            Err(s) => return s,
        };
        match r.inner.report.series.iter().find(|(n, _)| n == q).and_then(|(_, s)| s.get(knot)) {
            Some(v) => {
                *value = *v;
                SwStatus::Ok
            }
            None => fail(SwStatus::NotFound, format!("no value of `{q}` at knot {knot}")),
        }
    })
}

/// Writes `max_k |Q_k - Q_0|` of `quantity` to `*value`.
///
/// # Safety
/// `run` must be a live handle, `quantity` a NUL-terminated string and
/// `value` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_run_drift(run: *const SwRun, quantity: *const c_char, value: *mut f64) -> SwStatus {
    guard(|| {
        let Some(r) = run.as_ref() else { return fail(SwStatus::NullPointer, "run is null") };
        if value.is_null() {
            return fail(SwStatus::NullPointer, "value is null");
        }
        let q = match read_str(quantity, "quantity") {
            Ok(q) => q,
            Err(s) => return s,
        };
        match r.inner.report.drift(q) {
            Some(d) => {
                *value = d;
                SwStatus::Ok
            }
            None => fail(SwStatus::NotFound, format!("no quantity `{q}`")),
        }
    })
}

/// Largest identity sum relative to its terms over every row; NaN on a
/// null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_run_worst_identity_sum(run: *const SwRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.inner.report.worst_relative_sum())
}

/// Total Newton iterations over all slabs; -1 on a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_run_newton_iterations(run: *const SwRun) -> c_int {
    run.as_ref().map_or(-1, |r| r.inner.solution.reports.iter().map(|s| s.iterations as c_int).sum())
}

/// Writes the Noether residual report as CSV.
///
/// # Safety
/// `run` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sw_run_write_report(run: *const SwRun, path: *const c_char) -> SwStatus {
    guard(|| {
        let Some(r) = run.as_ref() else { return fail(SwStatus::NullPointer, "run is null") };
        let p = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match r.inner.report.write_csv(Path::new(p)) {
            Ok(()) => SwStatus::Ok,
            Err(e) => fail(SwStatus::IoError, e.to_string()),
        }
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_run_free(run: *mut SwRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
