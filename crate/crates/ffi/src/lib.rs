//! C interface to `rdllf`.
//!
//! Objects are opaque handles created by `*_new`/`*_compute`/`rdllf_simulate`
//! and released with the matching `*_free`. Every fallible call returns an
//! [`RdllfStatus`]; the message of the most recent failure on the calling
//! thread is available through [`rdllf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rdllf::bounds::{ConstantLedger, LedgerBuilder};
use rdllf::cli::{resolve_system, RunConfig};
use rdllf::error::BoundsError;
use rdllf::llf::{certify, Verdict};
use rdllf::model::DiscretizedSystem;
use rdllf::sim::{integrate, IntegratorSettings, Termination, TrajectoryRecord};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdllfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    LlfRefuted = 4,
    LlfInconclusive = 5,
    BoundsOverflow = 6,
    Simulation = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdllfTermination {
    Completed = 0,
    BlowUpDetected = 1,
    PositivityViolation = 2,
    StepFailure = 3,
}

/// A configured system.
pub struct RdllfSystem {
    config: RunConfig,
    system: DiscretizedSystem,
}

/// A computed constant ledger.
pub struct RdllfLedger {
    ledger: ConstantLedger,
    json: CString,
}

/// A recorded trajectory.
pub struct RdllfTrajectory {
    record: TrajectoryRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: RdllfStatus, msg: impl Into<String>) -> RdllfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> RdllfStatus) -> RdllfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(RdllfStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, RdllfStatus> {
    if p.is_null() {
        return Err(fail(RdllfStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RdllfStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rdllf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rdllf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a system from configuration text in the `key = value` format.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdllf_system_new(config: *const c_char, out: *mut *mut RdllfSystem) -> RdllfStatus {
    guard(|| {
        if out.is_null() {
            return fail(RdllfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match str_arg(config) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config = match RunConfig::parse(text) {
            Ok(c) => c,
            Err(e) => return fail(RdllfStatus::Config, e),
        };
        let system = match resolve_system(&config) {
            Ok(s) => s,
            Err(e) => return fail(RdllfStatus::Config, e.to_string()),
        };
        *out = Box::into_raw(Box::new(RdllfSystem { config, system }));
        RdllfStatus::Ok
    })
}

/// # Safety
/// `sys` must come from [`rdllf_system_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_system_free(sys: *mut RdllfSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of compartments, or 0 for a null handle.
///
/// # Safety
/// `sys` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_system_compartments(sys: *const RdllfSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.system.n())
}

/// Verifies the configured LLF candidate and computes the constant ledger.
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdllf_ledger_compute(sys: *const RdllfSystem, out: *mut *mut RdllfLedger) -> RdllfStatus {
    guard(|| {
        if out.is_null() {
            return fail(RdllfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(sys) = sys.as_ref() else {
            return fail(RdllfStatus::NullPointer, "null system handle");
        };
        let w = match sys.config.candidate() {
            Ok(Some(w)) => w,
            Ok(None) => return fail(RdllfStatus::Config, "no LLF candidate configured"),
            Err(e) => return fail(RdllfStatus::Config, e),
        };
        let grid = sys.config.grid();
        let cert = certify(&w, sys.system.reactions(), &grid);
        match cert.verdict {
            Verdict::Verified => {}
            Verdict::Refuted => return fail(RdllfStatus::LlfRefuted, "LLF candidate refuted"),
            Verdict::Inconclusive => return fail(RdllfStatus::LlfInconclusive, "LLF verification inconclusive"),
        }
        let (Some(cand), Some(consts)) = (cert.candidate, cert.constants) else {
            return fail(RdllfStatus::LlfInconclusive, "verified LLF without constants");
        };
        let ledger = match LedgerBuilder::run(cand, consts, &sys.system, grid.v_cap) {
            Ok(l) => l,
            Err(e @ BoundsError::NonFinite { .. }) => return fail(RdllfStatus::BoundsOverflow, e.to_string()),
            Err(e) => return fail(RdllfStatus::InvalidArgument, e.to_string()),
        };
        let json = CString::new(ledger.to_flat_json().to_string()).unwrap_or_default();
        *out = Box::into_raw(Box::new(RdllfLedger { ledger, json }));
        RdllfStatus::Ok
    })
}

/// Reads one flat ledger field, e.g. `"B"` or `"G_u_1"`.
///
/// # Safety
/// `ledger` must be a live handle, `field` a NUL-terminated string and
/// `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdllf_ledger_get(
    ledger: *const RdllfLedger,
    field: *const c_char,
    value: *mut f64,
) -> RdllfStatus {
    guard(|| {
        let (Some(l), false) = (ledger.as_ref(), value.is_null()) else {
            return fail(RdllfStatus::NullPointer, "null argument");
        };
        let name = match str_arg(field) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match l.ledger.entries().get(name) {
            Some(e) => {
                *value = e.value;
                RdllfStatus::Ok
            }
            None => fail(RdllfStatus::InvalidArgument, format!("unknown ledger field `{name}`")),
        }
    })
}

/// The ledger as a JSON object; owned by the handle.
///
/// # Safety
/// `ledger` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_ledger_json(ledger: *const RdllfLedger) -> *const c_char {
    ledger.as_ref().map_or(ptr::null(), |l| l.json.as_ptr())
}

/// # Safety
/// `ledger` must come from [`rdllf_ledger_compute`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_ledger_free(ledger: *mut RdllfLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}

/// Integrates the system with fixed step `dt` up to `t_end`, recording a
/// state every `record_every` (a multiple of `dt`).
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdllf_simulate(
    sys: *const RdllfSystem,
    t_end: f64,
    dt: f64,
    record_every: f64,
    out: *mut *mut RdllfTrajectory,
) -> RdllfStatus {
    guard(|| {
        if out.is_null() {
            return fail(RdllfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(sys) = sys.as_ref() else {
            return fail(RdllfStatus::NullPointer, "null system handle");
        };
        let settings = IntegratorSettings {
            t_end,
            dt,
            monitor_every: record_every,
            ..sys.config.integrator()
        };
        match integrate(&sys.system, None, &settings) {
            Ok(record) => {
                *out = Box::into_raw(Box::new(RdllfTrajectory { record }));
                RdllfStatus::Ok
            }
            Err(e) => fail(RdllfStatus::Simulation, e.to_string()),
        }
    })
}

/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdllf_trajectory_termination(traj: *const RdllfTrajectory) -> RdllfTermination {
    match traj.as_ref().map(|t| t.record.status) {
        Some(Termination::Completed) => RdllfTermination::Completed,
        Some(Termination::BlowUpDetected) => RdllfTermination::BlowUpDetected,
        Some(Termination::PositivityViolation) => RdllfTermination::PositivityViolation,
        Some(Termination::StepFailure) | None => RdllfTermination::StepFailure,
    }
}

/// Number of recorded states, or 0 for a null handle.
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_trajectory_len(traj: *const RdllfTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.record.states.len())
}

/// Largest `u_i + v_i` over the recorded states; NaN for a null handle.
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_trajectory_max_norm(traj: *const RdllfTrajectory) -> f64 {
    traj.as_ref().map_or(f64::NAN, |t| t.record.max_norm())
}

/// Copies recorded state `index` into `u` and `v`, each of length `n`.
///
/// # Safety
/// `traj` must be a live handle; `t` must be valid and `u`, `v` must point
/// to at least `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn rdllf_trajectory_state(
    traj: *const RdllfTrajectory,
    index: usize,
    t: *mut f64,
    u: *mut f64,
    v: *mut f64,
    n: usize,
) -> RdllfStatus {
    guard(|| {
        let Some(tr) = traj.as_ref() else {
            return fail(RdllfStatus::NullPointer, "null trajectory handle");
        };
        if t.is_null() || u.is_null() || v.is_null() {
            return fail(RdllfStatus::NullPointer, "null output buffer");
        }
        let Some(s) = tr.record.states.get(index) else {
            return fail(RdllfStatus::InvalidArgument, format!("state index {index} out of range"));
        };
        if n < s.n() {
            return fail(RdllfStatus::BufferTooSmall, format!("buffers need {} entries", s.n()));
        }
        *t = s.t;
        ptr::copy_nonoverlapping(s.u.as_ptr(), u, s.n());
        ptr::copy_nonoverlapping(s.v.as_ptr(), v, s.n());
        RdllfStatus::Ok
    })
}

/// # Safety
/// `traj` must come from [`rdllf_simulate`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rdllf_trajectory_free(traj: *mut RdllfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
