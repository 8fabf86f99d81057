//! C ABI over `fde-toeplitz`.
//!
//! Every fallible call returns an [`FdeStatus`]; on failure a message is
//! available from [`fde_last_error_message`] on the same thread. Handles are
//! opaque, created by `*_new*` functions and released by the matching
//! `*_free`. Freeing a null handle is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fde_toeplitz::experiments::scaled_system;
use fde_toeplitz::krylov::{pcg, NoPreconditioner, SolveReport, StoppingRule};
use fde_toeplitz::linalg::LinearOperator;
use fde_toeplitz::multigrid::{vcycle, Hierarchy, MgmCase, MgmTag, TauVariant, DEFAULT_COARSEST_THRESHOLD};
use fde_toeplitz::preconditioners::{build, PrecKind, Preconditioner};
use fde_toeplitz::quadrature::BoundEstimates;
use fde_toeplitz::spectral::min_eig_normalized;
use fde_toeplitz::symbols::{eval_fn, Angle, GridSize};
use fde_toeplitz::toeplitz::{assemble_dense, CoeffOptions, ToeplitzCoeffs, ToeplitzOperator};
use fde_toeplitz::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    NotSpd = 4,
    NotConverged = 5,
    Numerical = 6,
    Panic = 7,
}

/// Preconditioner selector; pass the integer value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdePrecKind {
    Identity = 0,
    StrangCirculant = 1,
    FrobeniusCirculant = 2,
    NaturalTau = 3,
    FrobeniusTau = 4,
    Laplacian = 5,
}

/// Multigrid smoother configuration; pass the integer value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdeMgmCase {
    Alpha = 0,
    Beta = 1,
    Gamma = 2,
    Delta = 3,
    FinestOnly = 4,
}

/// Symmetric Toeplitz matrix with a fast product.
pub struct FdeToeplitz {
    op: ToeplitzOperator,
}

pub struct FdePreconditioner {
    inner: Preconditioner,
}

pub struct FdeSolveReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FdeStatus {
    match err {
        Error::LengthMismatch { .. } => FdeStatus::LengthMismatch,
        Error::NotSpd { .. } | Error::NotPositiveDefinite { .. } => FdeStatus::NotSpd,
        Error::Domain(_) | Error::InvalidSize { .. } | Error::Singularity { .. } => FdeStatus::InvalidArgument,
        Error::NotStabilized { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::Breakdown { .. }
        | Error::ZeroDiagonal { .. }
        | Error::EigenNonConvergence { .. } => FdeStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (FdeStatus, String)>) -> FdeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            FdeStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (FdeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(name: &str) -> (FdeStatus, String) {
    (FdeStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (FdeStatus, String)> {
    if p.is_null() {
        return Err(null_err(name));
    }
    // SAFETY: caller guarantees `p` points to `len` readable doubles.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

unsafe fn output<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], (FdeStatus, String)> {
    if p.is_null() {
        return Err(null_err(name));
    }
    // SAFETY: caller guarantees `p` points to `len` writable doubles.
    Ok(unsafe { slice::from_raw_parts_mut(p, len) })
}

fn check_len(expected: usize, got: usize) -> Result<(), (FdeStatus, String)> {
    if expected != got {
        return Err(lib_err(Error::LengthMismatch { expected, got }));
    }
    Ok(())
}

fn prec_kind(kind: u32) -> Result<PrecKind, (FdeStatus, String)> {
    PrecKind::ALL
        .get(kind as usize)
        .copied()
        .ok_or((FdeStatus::InvalidArgument, format!("unknown preconditioner kind {kind}")))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fde_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn fde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `f_n(θ)` for `n ≥ 2`, `|θ| ≤ π`.
///
/// # Safety
/// `out` must be a valid pointer to one `double`.
#[no_mangle]
pub unsafe extern "C" fn fde_eval_fn(n: usize, theta: f64, out: *mut f64) -> FdeStatus {
    guard(|| {
        let out = unsafe { output(out, 1, "out") }?;
        let grid = GridSize::new(n).map_err(lib_err)?;
        let angle = Angle::new(theta).map_err(lib_err)?;
        out[0] = eval_fn(grid, angle);
        Ok(())
    })
}

/// The bound constants `k1`, `k2`, `c_infinity` to absolute tolerance `tol`.
///
/// # Safety
/// Each output must be a valid pointer to one `double`.
#[no_mangle]
pub unsafe extern "C" fn fde_bound_constants(tol: f64, k1: *mut f64, k2: *mut f64, c_infinity: *mut f64) -> FdeStatus {
    guard(|| {
        let k1 = unsafe { output(k1, 1, "k1") }?;
        let k2 = unsafe { output(k2, 1, "k2") }?;
        let c = unsafe { output(c_infinity, 1, "c_infinity") }?;
        let e = BoundEstimates::compute(tol).map_err(lib_err)?;
        k1[0] = e.k1.value;
        k2[0] = e.k2.value;
        c[0] = e.c_infinity.value;
        Ok(())
    })
}

/// `n λ₁(A_n)` from the dense eigensolver.
///
/// # Safety
/// `out` must be a valid pointer to one `double`.
#[no_mangle]
pub unsafe extern "C" fn fde_min_eig_normalized(n: usize, out: *mut f64) -> FdeStatus {
    guard(|| {
        let out = unsafe { output(out, 1, "out") }?;
        let grid = GridSize::new(n).map_err(lib_err)?;
        out[0] = min_eig_normalized(grid, &CoeffOptions::default()).map_err(lib_err)?;
        Ok(())
    })
}

/// Builds `A_n`, or `A_n / n` when `scaled` is nonzero.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fde_toeplitz_new_fn(n: usize, scaled: i32, out: *mut *mut FdeToeplitz) -> FdeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let coeffs = if scaled != 0 {
            scaled_system(n, &CoeffOptions::default())
        } else {
            GridSize::new(n).and_then(|g| ToeplitzCoeffs::for_fn(g, &CoeffOptions::default()))
        }
        .map_err(lib_err)?;
        let h = Box::new(FdeToeplitz {
            op: ToeplitzOperator::new(coeffs),
        });
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(h) };
        Ok(())
    })
}

/// Builds a Toeplitz matrix from its first column.
///
/// # Safety
/// `coeffs` must point to `len` doubles; `out` to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fde_toeplitz_from_coeffs(
    coeffs: *const f64,
    len: usize,
    out: *mut *mut FdeToeplitz,
) -> FdeStatus {
    guard(|| {
        let a = unsafe { input(coeffs, len, "coeffs") }?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let c = ToeplitzCoeffs::new(a.to_vec()).map_err(lib_err)?;
        let h = Box::new(FdeToeplitz {
            op: ToeplitzOperator::new(c),
        });
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(h) };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fde_toeplitz_free(h: *mut FdeToeplitz) {
    if !h.is_null() {
        // SAFETY: caller passes a handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Matrix order, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fde_toeplitz_order(h: *const FdeToeplitz) -> usize {
    // SAFETY: caller passes null or a live handle.
    unsafe { h.as_ref() }.map_or(0, |t| t.op.dim())
}

/// Copies the first column into `out[0..len]`; `len` must equal the order.
///
/// # Safety
/// `h` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fde_toeplitz_coeffs(h: *const FdeToeplitz, out: *mut f64, len: usize) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let t = unsafe { h.as_ref() }.ok_or_else(|| null_err("h"))?;
        let out = unsafe { output(out, len, "out") }?;
        check_len(t.op.dim(), len)?;
        out.copy_from_slice(t.op.coeffs().as_slice());
        Ok(())
    })
}

/// `y = T x`.
///
/// # Safety
/// `h` must be a live handle; `x` and `y` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fde_toeplitz_matvec(h: *const FdeToeplitz, x: *const f64, y: *mut f64, len: usize) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let t = unsafe { h.as_ref() }.ok_or_else(|| null_err("h"))?;
        let x = unsafe { input(x, len, "x") }?;
        let y = unsafe { output(y, len, "y") }?;
        check_len(t.op.dim(), len)?;
        t.op.apply_into(x, y);
        Ok(())
    })
}

/// Builds a preconditioner of kind `kind` (an [`FdePrecKind`] value) for `t`.
///
/// # Safety
/// `t` must be a live handle; `out` must point to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fde_preconditioner_new(
    t: *const FdeToeplitz,
    kind: u32,
    out: *mut *mut FdePreconditioner,
) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let t = unsafe { t.as_ref() }.ok_or_else(|| null_err("t"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let kind = prec_kind(kind)?;
        let p = build(kind, t.op.coeffs()).map_err(lib_err)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(FdePreconditioner { inner: p })) };
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fde_preconditioner_free(p: *mut FdePreconditioner) {
    if !p.is_null() {
        // SAFETY: caller passes a handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// `y = P⁻¹ x`.
///
/// # Safety
/// `p` must be a live handle; `x` and `y` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fde_preconditioner_apply_inverse(
    p: *const FdePreconditioner,
    x: *const f64,
    y: *mut f64,
    len: usize,
) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let p = unsafe { p.as_ref() }.ok_or_else(|| null_err("p"))?;
        let x = unsafe { input(x, len, "x") }?;
        let y = unsafe { output(y, len, "y") }?;
        let z = p.inner.apply_inverse(x).map_err(lib_err)?;
        y.copy_from_slice(&z);
        Ok(())
    })
}

fn store_report(report: SolveReport, out: *mut *mut FdeSolveReport) -> Result<(), (FdeStatus, String)> {
    let converged = report.converged;
    let iterations = report.iterations;
    // SAFETY: callers check `out` before solving.
    unsafe { *out = Box::into_raw(Box::new(FdeSolveReport { inner: report })) };
    if converged {
        Ok(())
    } else {
        Err((FdeStatus::NotConverged, format!("no convergence after {iterations} iterations")))
    }
}

/// PCG on `T x = b` from `x0 = 0`. `p` may be null for plain CG;
/// `max_iterations == 0` means `10 n`. On `NotConverged` the report is still
/// stored and must be freed.
///
/// # Safety
/// `t` must be a live handle, `p` null or a live handle of the same order,
/// `b` must point to `len` doubles and `out` to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fde_pcg_solve(
    t: *const FdeToeplitz,
    p: *const FdePreconditioner,
    b: *const f64,
    len: usize,
    tol: f64,
    max_iterations: usize,
    out: *mut *mut FdeSolveReport,
) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let t = unsafe { t.as_ref() }.ok_or_else(|| null_err("t"))?;
        let b = unsafe { input(b, len, "b") }?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        check_len(t.op.dim(), len)?;
        let mut stop = StoppingRule::for_order(len).with_tol(tol);
        if max_iterations > 0 {
            stop.max_iterations = max_iterations;
        }
        // SAFETY: caller passes null or a live handle.
        let report = match unsafe { p.as_ref() } {
            Some(p) => {
                check_len(len, p.inner.n())?;
                pcg(&t.op, &p.inner, b, None, &stop)
            }
            None => pcg(&t.op, &NoPreconditioner, b, None, &stop),
        }
        .map_err(lib_err)?;
        store_report(report, out)
    })
}

/// V-cycle multigrid on `T x = b` (order `2^k - 1`) with a dense Galerkin
/// hierarchy; `mgm_case` is an [`FdeMgmCase`] value.
///
/// # Safety
/// As for [`fde_pcg_solve`].
#[no_mangle]
pub unsafe extern "C" fn fde_mgm_solve(
    t: *const FdeToeplitz,
    mgm_case: u32,
    b: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut FdeSolveReport,
) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let t = unsafe { t.as_ref() }.ok_or_else(|| null_err("t"))?;
        let b = unsafe { input(b, len, "b") }?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        check_len(t.op.dim(), len)?;
        let tag = *MgmTag::ALL
            .get(mgm_case as usize)
            .ok_or((FdeStatus::InvalidArgument, format!("unknown multigrid case {mgm_case}")))?;
        let coeffs = t.op.coeffs().clone();
        let h = Hierarchy::build(assemble_dense(&coeffs), DEFAULT_COARSEST_THRESHOLD)
            .and_then(|h| h.with_fine_coeffs(coeffs))
            .map_err(lib_err)?;
        let stop = StoppingRule::for_order(len).with_tol(tol);
        let report =
            vcycle(&h, MgmCase::standard(tag), TauVariant::Frobenius, b, None, &stop).map_err(lib_err)?;
        store_report(report, out)
    })
}

/// # Safety
/// `r` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fde_solve_report_free(r: *mut FdeSolveReport) {
    if !r.is_null() {
        // SAFETY: caller passes a handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(r) });
    }
}

/// Iteration count, 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fde_solve_report_iterations(r: *const FdeSolveReport) -> usize {
    // SAFETY: caller passes null or a live handle.
    unsafe { r.as_ref() }.map_or(0, |r| r.inner.iterations)
}

/// 1 if converged, 0 otherwise or for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fde_solve_report_converged(r: *const FdeSolveReport) -> i32 {
    // SAFETY: caller passes null or a live handle.
    unsafe { r.as_ref() }.map_or(0, |r| i32::from(r.inner.converged))
}

/// Length of the residual history (iterations + 1), 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fde_solve_report_history_len(r: *const FdeSolveReport) -> usize {
    // SAFETY: caller passes null or a live handle.
    unsafe { r.as_ref() }.map_or(0, |r| r.inner.residual_history.len())
}

/// Copies the scaled-residual history; `len` must equal
/// [`fde_solve_report_history_len`].
///
/// # Safety
/// `r` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fde_solve_report_history(r: *const FdeSolveReport, out: *mut f64, len: usize) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let r = unsafe { r.as_ref() }.ok_or_else(|| null_err("r"))?;
        let out = unsafe { output(out, len, "out") }?;
        check_len(r.inner.residual_history.len(), len)?;
        out.copy_from_slice(&r.inner.residual_history);
        Ok(())
    })
}

/// Copies the solution; `len` must equal the system order.
///
/// # Safety
/// `r` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fde_solve_report_solution(r: *const FdeSolveReport, out: *mut f64, len: usize) -> FdeStatus {
    guard(|| {
        // SAFETY: caller passes null or a live handle.
        let r = unsafe { r.as_ref() }.ok_or_else(|| null_err("r"))?;
        let out = unsafe { output(out, len, "out") }?;
        check_len(r.inner.solution.len(), len)?;
        out.copy_from_slice(&r.inner.solution);
        Ok(())
    })
}
