//! C interface to the `muskat` solver.
//!
//! Fields and trajectories are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`MuskatStatus`]; on failure a message is kept per thread and can be read
//! with [`muskat_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use muskat::evolve::{evolve, Scheme, SolverConfig, Trajectory};
use muskat::nonlinearity::rhs_pseudospectral;
use muskat::spectral::{Complex, GridSpec, SpectralField};
use muskat::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuskatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    GridMismatch = 3,
    NonFinite = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque band-limited real field.
pub struct MuskatField(SpectralField);

/// Opaque result of a time integration.
pub struct MuskatTrajectory(Trajectory);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuskatScheme {
    Ifrk4 = 0,
    IfEuler = 1,
}

/// Time-stepping parameters. Fill with [`muskat_solver_params_default`]
/// and override as needed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MuskatSolverParams {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: MuskatScheme,
    pub blowup_a1_threshold: f64,
    pub snapshot_stride: usize,
}

/// Norms of one field. Sobolev norms are homogeneous.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MuskatNorms {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub l2: f64,
    pub h32: f64,
    pub h2: f64,
    pub linf: f64,
    pub max_f: f64,
    pub min_f: f64,
    pub linf_dxf: f64,
}

/// One row of a trajectory. Dissipation integrals are listed for the
/// orders 0, 3/2 and 2.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MuskatStep {
    pub t: f64,
    pub dt: f64,
    pub norms: MuskatNorms,
    pub diss_gravity: [f64; 3],
    pub diss_capillary: [f64; 3],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MuskatStatus {
    match e {
        Error::GridMismatch(_) => MuskatStatus::GridMismatch,
        Error::NonFinite { .. } => MuskatStatus::NonFinite,
        Error::Io { .. } => MuskatStatus::Io,
        Error::OffGrid { .. } => MuskatStatus::OutOfRange,
        _ => MuskatStatus::InvalidInput,
    }
}

struct Fail(MuskatStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MuskatStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MuskatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MuskatStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MuskatStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_field(f: SpectralField) -> *mut MuskatField {
    Box::into_raw(Box::new(MuskatField(f)))
}

fn convert_norms(n: &muskat::spectral::NormReport) -> MuskatNorms {
    MuskatNorms {
        a0: n.a0,
        a1: n.a1,
        a2: n.a2,
        l2: n.l2,
        h32: n.sobolev_order(1.5).unwrap_or(f64::NAN),
        h2: n.sobolev_order(2.0).unwrap_or(f64::NAN),
        linf: n.linf,
        max_f: n.max_f,
        min_f: n.min_f,
        linf_dxf: n.linf_dxf,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length
/// excluding the terminator. Returns 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn muskat_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn muskat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Field with all coefficients zero on modes `|n| <= band_limit`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_zeros(band_limit: usize, out: *mut *mut MuskatField) -> MuskatStatus {
    guard(|| {
        let grid = GridSpec::new(band_limit)?;
        write_out(out, boxed_field(SpectralField::zeros(grid)), "out")
    })
}

/// Field from its coefficients on modes `1..=count`, `count <= band_limit`;
/// higher modes are zero, negative modes follow by conjugate symmetry and
/// the mean is zero.
///
/// # Safety
/// `re` and `im` must be valid for `count` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_from_modes(
    band_limit: usize,
    re: *const f64,
    im: *const f64,
    count: usize,
    out: *mut *mut MuskatField,
) -> MuskatStatus {
    guard(|| {
        if count > 0 && (re.is_null() || im.is_null()) {
            return Err(null("coefficient array"));
        }
        if count > band_limit {
            return Err(Fail(
                MuskatStatus::InvalidInput,
                format!("{count} coefficients exceed band limit {band_limit}"),
            ));
        }
        let mut modes: Vec<Complex> = (0..count).map(|i| Complex::new(*re.add(i), *im.add(i))).collect();
        modes.resize(band_limit, Complex::new(0.0, 0.0));
        let grid = GridSpec::new(band_limit)?;
        let f = SpectralField::from_positive_modes(grid, &modes)?;
        write_out(out, boxed_field(f), "out")
    })
}

/// `a cos(m x)` on the given band.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_cosine(
    band_limit: usize,
    m: usize,
    a: f64,
    out: *mut *mut MuskatField,
) -> MuskatStatus {
    guard(|| {
        let f = SpectralField::cosine(GridSpec::new(band_limit)?, m, a)?;
        write_out(out, boxed_field(f), "out")
    })
}

/// Independent copy of a field.
///
/// # Safety
/// `field` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_clone(field: *const MuskatField, out: *mut *mut MuskatField) -> MuskatStatus {
    guard(|| {
        let f = deref(field, "field")?;
        write_out(out, boxed_field(f.0.clone()), "out")
    })
}

/// Releases a field. Null is ignored.
///
/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_free(field: *mut MuskatField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_band_limit(field: *const MuskatField, out: *mut usize) -> MuskatStatus {
    guard(|| {
        let f = deref(field, "field")?;
        write_out(out, f.0.band_limit(), "out")
    })
}

/// Coefficient of mode `n`, zero outside the band.
///
/// # Safety
/// `field` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_coeff(
    field: *const MuskatField,
    n: i64,
    re: *mut f64,
    im: *mut f64,
) -> MuskatStatus {
    guard(|| {
        let c = deref(field, "field")?.0.coeff(n);
        write_out(re, c.re, "re")?;
        write_out(im, c.im, "im")
    })
}

/// Values at the `m > 2 band_limit` equispaced points `x_j = -pi + 2 pi j / m`.
///
/// # Safety
/// `field` must be a live handle; `values` valid for `m` writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_sample(field: *const MuskatField, values: *mut f64, m: usize) -> MuskatStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if values.is_null() {
            return Err(null("values"));
        }
        let k = f.0.band_limit();
        if m <= 2 * k {
            return Err(Fail(
                MuskatStatus::InvalidInput,
                format!("{m} points alias band {k}; need more than {}", 2 * k),
            ));
        }
        let s = f.0.sample(m);
        ptr::copy_nonoverlapping(s.as_ptr(), values, m);
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_field_norms(field: *const MuskatField, out: *mut MuskatNorms) -> MuskatStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let n = muskat::spectral::norms(&f.0, 0.0, &[1.5, 2.0]);
        write_out(out, convert_norms(&n), "out")
    })
}

/// Nonlinear part `N(f)` of the right-hand side for the given `nu`.
///
/// # Safety
/// `field` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_rhs(field: *const MuskatField, nu: f64, out: *mut *mut MuskatField) -> MuskatStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Fail(MuskatStatus::InvalidInput, format!("nu = {nu} must be finite and nonnegative")));
        }
        write_out(out, boxed_field(rhs_pseudospectral(&f.0, nu)), "out")
    })
}

/// Defaults: `nu = 0`, `dt = 1e-3`, `t_end = 1`, IFRK4, blow-up threshold
/// 10, snapshot every 100 steps.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_solver_params_default(out: *mut MuskatSolverParams) -> MuskatStatus {
    guard(|| {
        let d = SolverConfig::new(0.0, 1e-3, 1.0, GridSpec::new(1)?);
        let params = MuskatSolverParams {
            nu: d.nu,
            dt: d.dt,
            t_end: d.t_end,
            scheme: MuskatScheme::Ifrk4,
            blowup_a1_threshold: d.blowup_a1_threshold,
            snapshot_stride: d.snapshot_stride,
        };
        write_out(out, params, "out")
    })
}

/// Integrates from `initial` on its own grid. A run stopped by the blow-up
/// threshold or a non-finite value still succeeds; query
/// [`muskat_trajectory_completed`].
///
/// # Safety
/// `initial` must be a live handle, `params` valid for reads and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_evolve(
    initial: *const MuskatField,
    params: *const MuskatSolverParams,
    out: *mut *mut MuskatTrajectory,
) -> MuskatStatus {
    guard(|| {
        let f0 = deref(initial, "initial")?;
        let p = deref(params, "params")?;
        let mut cfg = SolverConfig::new(p.nu, p.dt, p.t_end, f0.0.grid());
        cfg.scheme = match p.scheme {
            MuskatScheme::Ifrk4 => Scheme::IfRk4,
            MuskatScheme::IfEuler => Scheme::IfEuler,
        };
        cfg.blowup_a1_threshold = p.blowup_a1_threshold;
        cfg.snapshot_stride = p.snapshot_stride;
        cfg.validate()?;
        let traj = evolve(&f0.0, &cfg)?;
        write_out(out, Box::into_raw(Box::new(MuskatTrajectory(traj))), "out")
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn muskat_trajectory_free(traj: *mut MuskatTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recorded steps, including the initial row.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_trajectory_len(traj: *const MuskatTrajectory, out: *mut usize) -> MuskatStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        write_out(out, t.0.steps.len(), "out")
    })
}

/// Writes 1 if the run reached `t_end`, 0 if it was stopped early.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_trajectory_completed(traj: *const MuskatTrajectory, out: *mut i32) -> MuskatStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        write_out(out, t.0.completed() as i32, "out")
    })
}

/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_trajectory_step(
    traj: *const MuskatTrajectory,
    index: usize,
    out: *mut MuskatStep,
) -> MuskatStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        let r = t.0.steps.get(index).ok_or_else(|| {
            Fail(
                MuskatStatus::OutOfRange,
                format!("step {index} out of range (len {})", t.0.steps.len()),
            )
        })?;
        let step = MuskatStep {
            t: r.t,
            dt: r.dt,
            norms: convert_norms(&r.norms),
            diss_gravity: r.diss_gravity,
            diss_capillary: r.diss_capillary,
        };
        write_out(out, step, "out")
    })
}

/// Copy of the last stored state.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn muskat_trajectory_final_field(
    traj: *const MuskatTrajectory,
    out: *mut *mut MuskatField,
) -> MuskatStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        write_out(out, boxed_field(t.0.final_field().clone()), "out")
    })
}

/// Writes the trajectory table as CSV to the UTF-8 path `path`.
///
/// # Safety
/// `traj` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn muskat_trajectory_write_csv(
    traj: *const MuskatTrajectory,
    path: *const c_char,
) -> MuskatStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(MuskatStatus::InvalidInput, "path is not UTF-8".into()))?;
        let io = |e: std::io::Error| Fail(MuskatStatus::Io, format!("{path}: {e}"));
        let file = File::create(path).map_err(io)?;
        t.0.write_csv(BufWriter::new(file)).map_err(io)
    })
}
