//! C ABI for `vaxgame`.
//!
//! Handles (`VgConfig`, `VgRun`) are opaque and owned by the caller, who
//! releases them with the matching `*_free` function. Every fallible call
//! returns a [`VgStatus`]; on failure [`vg_last_error`] describes the
//! problem until the next failing call on the same thread.
//!
//! ```c
//! VgConfig *cfg = vg_config_new();
//! vg_config_set(cfg, "omega", "1/30");
//! VgComparison cmp;
//! if (vg_compare(cfg, &cmp) == VG_STATUS_OK) printf("%f\n", cmp.sed);
//! vg_config_free(cfg);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use vaxgame::config::{load_config, SimConfig};
use vaxgame::metrics::{compare, outcome, OutcomeMetrics};
use vaxgame::ne::run_ne;
use vaxgame::so::solve_fbs;
use vaxgame::{Error, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A solver reported instability or another numerical failure.
    SolverError = 3,
    OutOfRange = 4,
    Io = 5,
    Panic = 6,
}

/// Simulation settings; create with [`vg_config_new`] or [`vg_config_load`].
pub struct VgConfig {
    inner: SimConfig,
}

/// A finished behavioral or social-optimum run.
pub struct VgRun {
    trajectory: Trajectory,
    metrics: OutcomeMetrics,
    converged: bool,
    iterations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VgState {
    pub t: f64,
    pub s: f64,
    pub v: f64,
    pub i: f64,
    pub r: f64,
    /// Vaccination rate: `x` for behavioral runs, `u` for optimal-control runs.
    pub rate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VgMetrics {
    pub it: f64,
    pub vt: f64,
    pub asp: f64,
    /// Control objective; NaN for behavioral runs.
    pub j: f64,
    pub horizon: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VgComparison {
    pub ne: VgMetrics,
    pub so: VgMetrics,
    pub sed: f64,
    pub ne_converged: bool,
    pub so_converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> VgStatus {
    match err {
        Error::Instability { .. } => VgStatus::SolverError,
        Error::Range { .. } | Error::Dimension { .. } => VgStatus::OutOfRange,
        Error::Io { .. } => VgStatus::Io,
        _ => VgStatus::InvalidArgument,
    }
}

fn fail(status: VgStatus, message: impl Into<String>) -> VgStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> VgStatus) -> VgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(VgStatus::Panic, "internal panic"),
    }
}

fn from_result(r: vaxgame::Result<()>) -> VgStatus {
    match r {
        Ok(()) => VgStatus::Ok,
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, VgStatus> {
    if p.is_null() {
        return Err(fail(VgStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(VgStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn metrics(m: &OutcomeMetrics) -> VgMetrics {
    VgMetrics {
        it: m.it,
        vt: m.vt,
        asp: m.asp,
        j: m.j.unwrap_or(f64::NAN),
        horizon: m.horizon_used,
    }
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn vg_status_str(status: VgStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        VgStatus::Ok => b"ok\0",
        VgStatus::NullPointer => b"null pointer\0",
        VgStatus::InvalidArgument => b"invalid argument\0",
        VgStatus::SolverError => b"solver error\0",
        VgStatus::OutOfRange => b"out of range\0",
        VgStatus::Io => b"i/o error\0",
        VgStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default configuration. Never returns NULL.
#[no_mangle]
pub extern "C" fn vg_config_new() -> *mut VgConfig {
    Box::into_raw(Box::new(VgConfig {
        inner: SimConfig::default(),
    }))
}

/// Loads defaults overlaid with a `key = value` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vg_config_load(path: *const c_char, out: *mut *mut VgConfig) -> VgStatus {
    guard(|| {
        if out.is_null() {
            return fail(VgStatus::NullPointer, "out is NULL");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_config(Some(Path::new(path)), &[]) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(VgConfig { inner: cfg }));
                VgStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `cfg` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn vg_config_free(cfg: *mut VgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets one config key (same keys and value syntax as config files).
/// Cross-field checks such as the compartments summing to one happen in
/// [`vg_config_validate`] and when a run starts.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn vg_config_set(
    cfg: *mut VgConfig,
    key: *const c_char,
    value: *const c_char,
) -> VgStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(VgStatus::NullPointer, "cfg is NULL");
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match cfg.inner.set(key, value) {
            Ok(()) => VgStatus::Ok,
            Err(message) => fail(VgStatus::InvalidArgument, message),
        }
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vg_config_validate(cfg: *const VgConfig) -> VgStatus {
    guard(|| match cfg.as_ref() {
        Some(cfg) => from_result(cfg.inner.validate()),
        None => fail(VgStatus::NullPointer, "cfg is NULL"),
    })
}

/// Reads a model parameter (`beta`, `gamma`, `omega`, `eta`, `m`, `c`, `k`,
/// `c_v`, `u_max`).
///
/// # Safety
/// `cfg` must be a live handle, `name` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vg_config_get_param(
    cfg: *const VgConfig,
    name: *const c_char,
    out: *mut f64,
) -> VgStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(VgStatus::NullPointer, "cfg is NULL");
        };
        if out.is_null() {
            return fail(VgStatus::NullPointer, "out is NULL");
        }
        let name = match str_arg(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        match cfg.inner.params.get(name) {
            Ok(v) => {
                *out = v;
                VgStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

unsafe fn run_with(
    cfg: *const VgConfig,
    out: *mut *mut VgRun,
    body: impl FnOnce(&SimConfig) -> vaxgame::Result<VgRun>,
) -> VgStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(VgStatus::NullPointer, "cfg is NULL");
        };
        if out.is_null() {
            return fail(VgStatus::NullPointer, "out is NULL");
        }
        match cfg.inner.validate().and_then(|()| body(&cfg.inner)) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(run));
                VgStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Behavioral run over the configured horizon. Non-convergence is not an
/// error; query it with [`vg_run_converged`].
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vg_ne_run(cfg: *const VgConfig, out: *mut *mut VgRun) -> VgStatus {
    run_with(cfg, out, |c| {
        let grid = c.grid()?;
        let run = run_ne(&c.params, c.init, grid, c.eq_tol)?;
        let m = outcome(&run.trajectory, &c.params, grid.t_end(), None)?;
        Ok(VgRun {
            trajectory: run.trajectory,
            metrics: m,
            converged: run.converged,
            iterations: 0,
        })
    })
}

/// Social optimum by forward-backward sweep.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vg_so_run(cfg: *const VgConfig, out: *mut *mut VgRun) -> VgStatus {
    run_with(cfg, out, |c| {
        let grid = c.grid()?;
        let run = solve_fbs(&c.params, c.init, &c.fbs()?)?;
        let m = outcome(&run.states, &c.params, grid.t_end(), Some(run.objective_j))?;
        Ok(VgRun {
            trajectory: run.states,
            metrics: m,
            converged: run.converged,
            iterations: run.iterations,
        })
    })
}

/// # Safety
/// `run` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn vg_run_free(run: *mut VgRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of grid nodes; 0 for NULL.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vg_run_len(run: *const VgRun) -> usize {
    run.as_ref().map_or(0, |r| r.trajectory.states.len())
}

/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vg_run_converged(run: *const VgRun) -> bool {
    run.as_ref().is_some_and(|r| r.converged)
}

/// Sweep iterations for optimal-control runs, 0 for behavioral runs.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vg_run_iterations(run: *const VgRun) -> usize {
    run.as_ref().map_or(0, |r| r.iterations)
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vg_run_state(run: *const VgRun, index: usize, out: *mut VgState) -> VgStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), out.is_null()) else {
            return fail(VgStatus::NullPointer, "run or out is NULL");
        };
        let Some(st) = run.trajectory.states.get(index) else {
            return fail(
                VgStatus::OutOfRange,
                format!("index {index} beyond {} nodes", run.trajectory.states.len()),
            );
        };
        *out = VgState {
            t: run.trajectory.grid.time(index),
            s: st.s,
            v: st.v,
            i: st.i,
            r: st.r,
            rate: st.rate,
        };
        VgStatus::Ok
    })
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vg_run_metrics(run: *const VgRun, out: *mut VgMetrics) -> VgStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), out.is_null()) else {
            return fail(VgStatus::NullPointer, "run or out is NULL");
        };
        *out = metrics(&run.metrics);
        VgStatus::Ok
    })
}

/// Runs both models and fills `out` with their metrics and the deficit.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vg_compare(cfg: *const VgConfig, out: *mut VgComparison) -> VgStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out.is_null()) else {
            return fail(VgStatus::NullPointer, "cfg or out is NULL");
        };
        let c = &cfg.inner;
        let result = c
            .validate()
            .and_then(|()| c.grid())
            .and_then(|g| Ok((g, c.fbs()?)))
            .and_then(|(g, fbs)| compare(&c.params, c.init, g, c.eq_tol, &fbs));
        match result {
            Ok(cmp) => {
                *out = VgComparison {
                    ne: metrics(&cmp.ne),
                    so: metrics(&cmp.so),
                    sed: cmp.sed,
                    ne_converged: cmp.ne_converged,
                    so_converged: cmp.so_converged,
                };
                VgStatus::Ok
            }
            Err(e) => from_result(Err(e)),
        }
    })
}
