//! C ABI over `vns-core`.
//!
//! Fields and simulations are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`VnsStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`vns_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use vns_core::elliptic::{apply_rmu, invert_rmu, Viscosity, ViscosityBounds};
use vns_core::io::parse_config;
use vns_core::solver::{cfl_dt, nu_explicit, step_with_report, SolverConfig, State};
use vns_core::spectral::{biot_savart, Grid, ScalarField};
use vns_core::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VnsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BoundsViolation = 3,
    NotConverged = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque `n × n` real field on a periodic grid.
pub struct VnsField {
    field: ScalarField,
}

/// Opaque simulation: solver configuration plus current state.
pub struct VnsSim {
    cfg: SolverConfig,
    state: State,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> VnsStatus {
    match e {
        Error::BoundsViolation { .. } | Error::InvalidBounds(_) => VnsStatus::BoundsViolation,
        Error::NotConverged { .. } => VnsStatus::NotConverged,
        Error::Io(_) | Error::Snapshot(_) => VnsStatus::Io,
        Error::StepFailed { source, .. } => status_of(source),
        _ => VnsStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), VnsStatus>) -> VnsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VnsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            VnsStatus::Panic
        }
    }
}

fn fail(e: Error) -> VnsStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> VnsStatus {
    set_error(&format!("{what} is null"));
    VnsStatus::NullPointer
}

unsafe fn field_ref<'a>(p: *const VnsField, what: &str) -> Result<&'a ScalarField, VnsStatus> {
    p.as_ref().map(|f| &f.field).ok_or_else(|| null(what))
}

fn out_field(out: *mut *mut VnsField, field: ScalarField) {
    unsafe {
        *out = Box::into_raw(Box::new(VnsField { field }));
    }
}

/// Message of the most recent failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies `n*n` values (index `j*n + i`) into a new field on `[0, l)²`
/// with two-thirds dealiasing.
///
/// # Safety
/// `values` must point to `n*n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vns_field_new(n: u32, l: f64, values: *const f64, out: *mut *mut VnsField) -> VnsStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = Grid::new(n as usize, l, vns_core::spectral::DealiasRule::TwoThirds).map_err(fail)?;
        let data = std::slice::from_raw_parts(values, grid.len()).to_vec();
        let field = ScalarField::new(&grid, data).map_err(fail)?;
        if !field.is_finite() {
            return Err(fail(Error::NonFinite));
        }
        out_field(out, field);
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn vns_field_free(field: *mut VnsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Grid size of a field, 0 for null.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vns_field_n(field: *const VnsField) -> u32 {
    field.as_ref().map_or(0, |f| f.field.grid().n() as u32)
}

/// Copies the field's `n*n` values into `dst`, which holds `len` doubles.
///
/// # Safety
/// `field` must be a live handle and `dst` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vns_field_values(field: *const VnsField, dst: *mut f64, len: usize) -> VnsStatus {
    guard(|| {
        let f = field_ref(field, "field")?;
        if dst.is_null() {
            return Err(null("dst"));
        }
        let v = f.values();
        if len < v.len() {
            set_error(&format!("destination holds {len} values, need {}", v.len()));
            return Err(VnsStatus::InvalidArgument);
        }
        std::ptr::copy_nonoverlapping(v.as_ptr(), dst, v.len());
        Ok(())
    })
}

unsafe fn viscosity(mu: *const VnsField, mu_lo: f64, mu_hi: f64) -> Result<Viscosity, VnsStatus> {
    let m = field_ref(mu, "mu")?;
    let b = ViscosityBounds::new(mu_lo, mu_hi).map_err(fail)?;
    Viscosity::new(m.clone(), b).map_err(fail)
}

/// `a = R_μ ω` with `μ` checked against `[mu_lo, mu_hi]`.
///
/// # Safety
/// `mu` and `omega` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vns_apply_rmu(
    mu: *const VnsField,
    mu_lo: f64,
    mu_hi: f64,
    omega: *const VnsField,
    out: *mut *mut VnsField,
) -> VnsStatus {
    guard(|| {
        let mu = viscosity(mu, mu_lo, mu_hi)?;
        let w = field_ref(omega, "omega")?;
        if out.is_null() {
            return Err(null("out"));
        }
        out_field(out, apply_rmu(&mu, w).map_err(fail)?);
        Ok(())
    })
}

/// Solves `R_μ ω = a` to relative tolerance `tol`; writes the iteration count
/// to `iterations` when it is not null.
///
/// # Safety
/// `mu` and `a` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vns_invert_rmu(
    mu: *const VnsField,
    mu_lo: f64,
    mu_hi: f64,
    a: *const VnsField,
    tol: f64,
    out: *mut *mut VnsField,
    iterations: *mut u32,
) -> VnsStatus {
    guard(|| {
        let mu = viscosity(mu, mu_lo, mu_hi)?;
        let a = field_ref(a, "a")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (w, rep) = invert_rmu(&mu, a, tol).map_err(fail)?;
        if !iterations.is_null() {
            *iterations = rep.iterations as u32;
        }
        out_field(out, w);
        Ok(())
    })
}

/// Velocity `u = ∇⊥Δ⁻¹ω` as two new fields.
///
/// # Safety
/// `omega` must be a live handle; `ux` and `uy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vns_biot_savart(
    omega: *const VnsField,
    ux: *mut *mut VnsField,
    uy: *mut *mut VnsField,
) -> VnsStatus {
    guard(|| {
        let w = field_ref(omega, "omega")?;
        if ux.is_null() || uy.is_null() {
            return Err(null("output"));
        }
        let u = biot_savart(w).map_err(fail)?;
        out_field(ux, u.x);
        out_field(uy, u.y);
        Ok(())
    })
}

/// Builds a simulation from a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vns_sim_new_from_config(path: *const c_char, out: *mut *mut VnsSim) -> VnsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = CStr::from_ptr(path).to_str().map_err(|_| {
            set_error("path is not UTF-8");
            VnsStatus::InvalidArgument
        })?;
        let cfg = parse_config(Path::new(p)).map_err(fail)?;
        let state = cfg.initial_state().map_err(fail)?;
        *out = Box::into_raw(Box::new(VnsSim { cfg: cfg.solver, state }));
        Ok(())
    })
}

/// Advances by one step. `dt <= 0` selects the CFL step; a positive `dt`
/// is capped by it.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vns_sim_step(sim: *mut VnsSim, dt: f64) -> VnsStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        if dt.is_nan() {
            return Err(fail(Error::InvalidArgument("dt is NaN".into())));
        }
        let nu = nu_explicit(s.state.bounds, s.cfg.nu_bar(s.state.bounds));
        let limit = cfl_dt(&s.state.velocity(), s.cfg.cfl, nu);
        let dt = if dt > 0.0 { dt.min(limit) } else { limit };
        let (next, _) = step_with_report(&s.state, &s.cfg, dt).map_err(fail)?;
        s.state = next;
        Ok(())
    })
}

/// Current time, NaN for null.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vns_sim_time(sim: *const VnsSim) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.state.t)
}

/// Copy of the current vorticity.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vns_sim_omega(sim: *const VnsSim, out: *mut *mut VnsField) -> VnsStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        out_field(out, s.state.omega.clone());
        Ok(())
    })
}

/// # Safety
/// `sim` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn vns_sim_free(sim: *mut VnsSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
