//! C interface to the capguard simulator.
//!
//! Simulations are opaque handles created from a scenario file or JSON text
//! and released with `cg_simulation_free`. Every fallible call returns a
//! `CgStatus`; on failure `cg_last_error_message` describes the most recent
//! error on the calling thread. Strings returned by the library must be
//! released with `cg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use capguard::geometry::capsule_min_distance;
use capguard::{Capsule, Error, Scenario, Simulation, TaskMode, Vec3};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidScenario = 5,
    InvalidModel = 6,
    InvalidParam = 7,
    Geometry = 8,
    Control = 9,
    Panic = 10,
}

/// Task mode reported for a tick.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgMode {
    CaTrack = 0,
    CaHold = 1,
    Work = 2,
    Complete = 3,
}

impl From<TaskMode> for CgMode {
    fn from(m: TaskMode) -> Self {
        match m {
            TaskMode::CaTrack => CgMode::CaTrack,
            TaskMode::CaHold => CgMode::CaHold,
            TaskMode::Work => CgMode::Work,
            TaskMode::Complete => CgMode::Complete,
        }
    }
}

/// State recorded on one tick.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgTickState {
    pub t: f64,
    pub q: [f64; 7],
    pub qdot_cmd: [f64; 7],
    pub p_e: [f64; 3],
    pub p_g: [f64; 3],
    pub d_min: f64,
    pub v_rel: f64,
    pub v_rep_mod: f64,
    pub gamma: f64,
    pub beta: f64,
    pub mode: CgMode,
    /// 1 when the human was inside the safety zone.
    pub in_zone: i32,
}

/// Metrics of a completed run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgRunSummary {
    pub ticks: usize,
    pub min_d_min: f64,
    pub min_d_min_t: f64,
    pub max_eef_accel: f64,
    /// NaN when the task did not complete.
    pub completion_time: f64,
    pub final_error: f64,
    pub violations: usize,
}

/// Opaque simulation handle.
pub struct CgSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CgStatus {
    match e {
        Error::Io { .. } | Error::Output(_) => CgStatus::Io,
        Error::Json { .. } => CgStatus::Parse,
        Error::Scenario(_) | Error::Task(_) => CgStatus::InvalidScenario,
        Error::Model(_) => CgStatus::InvalidModel,
        Error::Param(_) => CgStatus::InvalidParam,
        Error::Geometry(_) => CgStatus::Geometry,
        Error::Control(_) => CgStatus::Control,
    }
}

fn fail(status: CgStatus, msg: impl Into<String>) -> CgStatus {
    set_last_error(msg);
    status
}

fn from_error(e: Error) -> CgStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, converting panics into `CgStatus::Panic`.
fn guard(f: impl FnOnce() -> CgStatus) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CgStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, CgStatus> {
    if ptr.is_null() {
        return Err(fail(CgStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(CgStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn vec3_arg(ptr: *const f64, name: &str) -> Result<Vec3, CgStatus> {
    if ptr.is_null() {
        return Err(fail(CgStatus::NullPointer, format!("{name} is null")));
    }
    let s = std::slice::from_raw_parts(ptr, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn handle<'a>(sim: *mut CgSimulation) -> Result<&'a mut CgSimulation, CgStatus> {
    sim.as_mut().ok_or_else(|| fail(CgStatus::NullPointer, "simulation handle is null"))
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

fn create(scenario: Result<Scenario, Error>, out: *mut *mut CgSimulation) -> CgStatus {
    if out.is_null() {
        return fail(CgStatus::NullPointer, "output handle pointer is null");
    }
    let sim = match scenario.and_then(|s| Simulation::new(&s, None)) {
        Ok(sim) => sim,
        Err(e) => return from_error(e),
    };
    unsafe { *out = Box::into_raw(Box::new(CgSimulation { sim })) };
    CgStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if none.
/// Release with `cg_string_free`.
#[no_mangle]
pub extern "C" fn cg_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a scenario file and creates a simulation.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_from_file(path: *const c_char, out: *mut *mut CgSimulation) -> CgStatus {
    guard(|| {
        let path = try_ffi!(str_arg(path, "path"));
        create(Scenario::load(path), out)
    })
}

/// Creates a simulation from scenario JSON text. A relative robot model
/// path is resolved against the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_from_json(json: *const c_char, out: *mut *mut CgSimulation) -> CgStatus {
    guard(|| {
        let json = try_ffi!(str_arg(json, "json"));
        create(Scenario::from_json_str(json), out)
    })
}

/// Destroys a simulation. NULL is ignored.
///
/// # Safety
/// `sim` must come from `cg_simulation_from_*` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_free(sim: *mut CgSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of ticks covering the scenario duration.
///
/// # Safety
/// `sim` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_tick_count(sim: *const CgSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.sim.tick_count())
}

/// Advances one tick and optionally reports its state.
///
/// # Safety
/// `sim` must be a live handle; `state` may be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_step(sim: *mut CgSimulation, state: *mut CgTickState) -> CgStatus {
    guard(|| {
        let h = try_ffi!(handle(sim));
        let detail = match h.sim.step() {
            Ok(d) => d,
            Err(e) => return from_error(e),
        };
        if let Some(out) = state.as_mut() {
            let r = &detail.record;
            let mut q = [0.0; 7];
            let mut qdot = [0.0; 7];
            q.copy_from_slice(r.q.as_slice());
            qdot.copy_from_slice(r.qdot_cmd.as_slice());
            *out = CgTickState {
                t: r.t,
                q,
                qdot_cmd: qdot,
                p_e: r.p_e.into(),
                p_g: r.p_g.into(),
                d_min: r.d_min,
                v_rel: r.v_rel,
                v_rep_mod: r.v_rep_mod,
                gamma: r.gamma,
                beta: r.beta,
                mode: r.mode.into(),
                in_zone: detail.in_zone as i32,
            };
        }
        CgStatus::Ok
    })
}

/// Runs the remaining ticks and reports the metrics.
///
/// # Safety
/// `sim` must be a live handle; `summary` may be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_run(sim: *mut CgSimulation, summary: *mut CgRunSummary) -> CgStatus {
    guard(|| {
        let h = try_ffi!(handle(sim));
        let out = match h.sim.run() {
            Ok(o) => o,
            Err(e) => return from_error(e),
        };
        if let Some(s) = summary.as_mut() {
            let m = &out.metrics;
            *s = CgRunSummary {
                ticks: m.ticks,
                min_d_min: m.min_d_min,
                min_d_min_t: m.min_d_min_t,
                max_eef_accel: m.max_eef_accel,
                completion_time: m.completion_time.unwrap_or(f64::NAN),
                final_error: m.final_error,
                violations: m.violations.len(),
            };
        }
        CgStatus::Ok
    })
}

/// Changes one controller parameter. Rejected values leave the simulation
/// unchanged.
///
/// # Safety
/// `sim` must be a live handle; `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_set_param(sim: *mut CgSimulation, name: *const c_char, value: f64) -> CgStatus {
    guard(|| {
        let h = try_ffi!(handle(sim));
        let name = try_ffi!(str_arg(name, "name"));
        match h.sim.set_param(name, value) {
            Ok(()) => CgStatus::Ok,
            Err(e) => fail(CgStatus::InvalidParam, e.to_string()),
        }
    })
}

/// Steers a capsule of a live human toward endpoints `a` and `b` (3 doubles
/// each). The speed actually used is written to `speed_out` when non-NULL.
///
/// # Safety
/// `sim` must be a live handle, `id` a NUL-terminated string, `a` and `b`
/// point to 3 doubles, `speed_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_set_human_target(
    sim: *mut CgSimulation,
    id: *const c_char,
    a: *const f64,
    b: *const f64,
    max_speed: f64,
    speed_out: *mut f64,
) -> CgStatus {
    guard(|| {
        let h = try_ffi!(handle(sim));
        let id = try_ffi!(str_arg(id, "id"));
        let a = try_ffi!(vec3_arg(a, "a"));
        let b = try_ffi!(vec3_arg(b, "b"));
        match h.sim.set_human_target(id, a, b, max_speed) {
            Ok(speed) => {
                if let Some(out) = speed_out.as_mut() {
                    *out = speed;
                }
                CgStatus::Ok
            }
            Err(msg) => fail(CgStatus::InvalidArgument, msg),
        }
    })
}

/// Returns the simulation to its initial state and parameters.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cg_simulation_reset(sim: *mut CgSimulation) -> CgStatus {
    guard(|| {
        let h = try_ffi!(handle(sim));
        h.sim.reset();
        CgStatus::Ok
    })
}

/// Signed clearance between capsule `a0`-`a1` (radius `ra`) and capsule
/// `b0`-`b1` (radius `rb`); negative on overlap. Witness points are written
/// to `wa` and `wb` (3 doubles each) when non-NULL.
///
/// # Safety
/// Point arguments must reference 3 doubles; `d_out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cg_capsule_distance(
    a0: *const f64,
    a1: *const f64,
    ra: f64,
    b0: *const f64,
    b1: *const f64,
    rb: f64,
    d_out: *mut f64,
    wa: *mut f64,
    wb: *mut f64,
) -> CgStatus {
    guard(|| {
        let ca = try_ffi!(vec3_arg(a0, "a0").and_then(|p| Ok((p, vec3_arg(a1, "a1")?))));
        let cb = try_ffi!(vec3_arg(b0, "b0").and_then(|p| Ok((p, vec3_arg(b1, "b1")?))));
        if d_out.is_null() {
            return fail(CgStatus::NullPointer, "d_out is null");
        }
        let build = |id: &str, (p, q): (Vec3, Vec3), r: f64| {
            Capsule::new(id, p, q, r).map_err(|e| fail(CgStatus::Geometry, e.to_string()))
        };
        let c1 = try_ffi!(build("A", ca, ra));
        let c2 = try_ffi!(build("B", cb, rb));
        let res = capsule_min_distance(&c1, &c2, None);
        *d_out = res.d_min;
        if !wa.is_null() {
            std::slice::from_raw_parts_mut(wa, 3).copy_from_slice(res.r1.as_slice());
        }
        if !wb.is_null() {
            std::slice::from_raw_parts_mut(wb, 3).copy_from_slice(res.r2.as_slice());
        }
        CgStatus::Ok
    })
}
