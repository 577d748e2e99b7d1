//! C ABI for `hexlat`.
//!
//! Every fallible function returns a [`HexlatStatus`] and writes its result
//! through out-pointers. On failure the message is available from
//! [`hexlat_last_error`] on the same thread. Shell tables and kernels are
//! opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hexlat::kernel::RadialKernel;
use hexlat::moduli::{self, Basis, HalfPlanePoint};
use hexlat::perturbation::{self, HessianRecord, Profile, TripleEnergy};
use hexlat::shells::{self, IndexPair, ShellIndexSet};
use hexlat::variational;
use hexlat::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HexlatStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    ReductionFailed = 3,
    Partition = 4,
    Singularity = 5,
    KernelSpec = 6,
    Precondition = 7,
    OutOfRange = 8,
    InvalidUtf8 = 9,
    Panic = 10,
    Other = 11,
}

/// Energy profile for the triple energy functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HexlatProfile {
    Squared = 0,
    Linear = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HexlatBasis {
    pub v1: [f64; 2],
    pub w1: [f64; 2],
    pub x: f64,
    pub y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HexlatMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

/// `[[h1, h2], [h2, h3]]` with its eigenvalues.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HexlatHessian {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HexlatMinimum {
    pub argmin: [f64; 2],
    /// Argmin in cell coordinates.
    pub cell: [f64; 2],
    pub value: f64,
    pub grid_resolution: f64,
}

/// Shell table from [`hexlat_shells_enumerate`].
pub struct HexlatShells {
    shells: Vec<ShellIndexSet>,
    members: Vec<Vec<IndexPair>>,
}

/// Radial kernel from [`hexlat_kernel_parse`].
pub struct HexlatKernel {
    kernel: RadialKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HexlatStatus {
    match e {
        Error::Domain(_) => HexlatStatus::Domain,
        Error::ReductionFailed { .. } => HexlatStatus::ReductionFailed,
        Error::Partition { .. } => HexlatStatus::Partition,
        Error::Singularity { .. } => HexlatStatus::Singularity,
        Error::KernelSpec(_) => HexlatStatus::KernelSpec,
        Error::Precondition(_) => HexlatStatus::Precondition,
        _ => HexlatStatus::Other,
    }
}

struct Fail(HexlatStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HexlatStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HexlatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HexlatStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HexlatStatus::Panic
        }
    }
}

unsafe fn slot<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn basis_out(b: &Basis) -> HexlatBasis {
    HexlatBasis { v1: b.v1, w1: b.w1, x: b.x, y: b.y }
}

fn hessian_out(h: &HessianRecord) -> HexlatHessian {
    HexlatHessian { h1: h.h1, h2: h.h2, h3: h.h3, lambda_min: h.lambda_min, lambda_max: h.lambda_max }
}

fn profile_of(p: HexlatProfile) -> Profile {
    match p {
        HexlatProfile::Squared => Profile::Squared,
        HexlatProfile::Linear => Profile::Linear,
    }
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hexlat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn hexlat_status_name(status: HexlatStatus) -> *const c_char {
    let s: &'static CStr = match status {
        HexlatStatus::Ok => c"ok",
        HexlatStatus::NullPointer => c"null pointer",
        HexlatStatus::Domain => c"domain error",
        HexlatStatus::ReductionFailed => c"reduction failed",
        HexlatStatus::Partition => c"partition error",
        HexlatStatus::Singularity => c"singularity",
        HexlatStatus::KernelSpec => c"invalid kernel spec",
        HexlatStatus::Precondition => c"precondition failed",
        HexlatStatus::OutOfRange => c"index out of range",
        HexlatStatus::InvalidUtf8 => c"invalid utf-8",
        HexlatStatus::Panic => c"panic",
        HexlatStatus::Other => c"error",
    };
    s.as_ptr()
}

/// # Safety
/// `out` must be null or point to a writable `HexlatBasis`.
#[no_mangle]
pub unsafe extern "C" fn hexlat_basis_from_params(x: f64, y: f64, out: *mut HexlatBasis) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        *o = basis_out(&moduli::basis_from_params(x, y)?);
        Ok(())
    })
}

/// # Safety
/// `out` must be null or point to a writable `HexlatBasis`.
#[no_mangle]
pub unsafe extern "C" fn hexlat_hex_basis(out: *mut HexlatBasis) -> HexlatStatus {
    guard(|| {
        *slot(out, "out")? = basis_out(&moduli::hex_lattice());
        Ok(())
    })
}

/// Writes the deep hole `p` to `out[0..2]`.
///
/// # Safety
/// `out` must be null or point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hexlat_deep_hole(out: *mut f64) -> HexlatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = moduli::deep_hole().p;
        ptr::copy_nonoverlapping(p.as_ptr(), out, 2);
        Ok(())
    })
}

/// Reduces `x + iy` to the fundamental domain. `matrix` receives the
/// canonical element that maps the reduced point back to the input.
///
/// # Safety
/// Each out-pointer must be null or writable; `out_x`, `out_y` are required.
#[no_mangle]
pub unsafe extern "C" fn hexlat_reduce(
    x: f64,
    y: f64,
    out_x: *mut f64,
    out_y: *mut f64,
    matrix: *mut HexlatMatrix,
) -> HexlatStatus {
    guard(|| {
        let ox = slot(out_x, "out_x")?;
        let oy = slot(out_y, "out_y")?;
        let (z, m) = moduli::reduce_to_fundamental_domain(HalfPlanePoint::new(x, y)?)?;
        *ox = z.x;
        *oy = z.y;
        if let Some(mm) = matrix.as_mut() {
            *mm = HexlatMatrix { a: m.a, b: m.b, c: m.c, d: m.d };
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hexlat_lattice_distance(x1: f64, y1: f64, x2: f64, y2: f64, out: *mut f64) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        *o = moduli::lattice_distance(&Basis::from_params(x1, y1)?, &Basis::from_params(x2, y2)?);
        Ok(())
    })
}

/// Triple energy at real index `(k, l)` and parameters `(x, y)`.
///
/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hexlat_triple_energy(
    profile: HexlatProfile,
    k: f64,
    l: f64,
    x: f64,
    y: f64,
    out: *mut f64,
) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        *o = TripleEnergy::at_real(profile_of(profile), k, l)?.eval(x, y)?;
        Ok(())
    })
}

/// Central-difference gradient written to `out[0..2]`.
///
/// # Safety
/// `out` must be null or point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hexlat_triple_gradient(
    profile: HexlatProfile,
    k: f64,
    l: f64,
    x: f64,
    y: f64,
    step: f64,
    out: *mut f64,
) -> HexlatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let e = TripleEnergy::at_real(profile_of(profile), k, l)?;
        let g = perturbation::numeric_gradient(&e, x, y, step)?;
        ptr::copy_nonoverlapping(g.as_ptr(), out, 2);
        Ok(())
    })
}

/// Exact Hessian of the squared triple energy at the hexagonal point.
/// `q` (may be null) receives `k^2 + kl + l^2 - k - l`.
///
/// # Safety
/// `out` must be null or writable; `q` may be null.
#[no_mangle]
pub unsafe extern "C" fn hexlat_hessian_squared_closed_form(
    k: i64,
    l: i64,
    out: *mut HexlatHessian,
    q: *mut i64,
) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        let h = perturbation::closed_form_hessian_squared(k, l);
        *o = hessian_out(&h.record);
        if let Some(q) = q.as_mut() {
            *q = i64::try_from(h.q).map_err(|_| Fail(HexlatStatus::OutOfRange, format!("q = {} overflows i64", h.q)))?;
        }
        Ok(())
    })
}

/// Finite-difference Hessian at `(x, y)`.
///
/// # Safety
/// `out` must be null or point to a writable `HexlatHessian`.
#[no_mangle]
pub unsafe extern "C" fn hexlat_hessian_numeric(
    profile: HexlatProfile,
    k: f64,
    l: f64,
    x: f64,
    y: f64,
    step: f64,
    out: *mut HexlatHessian,
) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        let e = TripleEnergy::at_real(profile_of(profile), k, l)?;
        *o = hessian_out(&perturbation::numeric_hessian(&e, x, y, step)?);
        Ok(())
    })
}

/// Hexagonal shells with radius at most `r_max`.
///
/// # Safety
/// `out` must be null or point to a writable handle pointer. The handle
/// is released with [`hexlat_shells_free`].
#[no_mangle]
pub unsafe extern "C" fn hexlat_shells_enumerate(r_max: f64, out: *mut *mut HexlatShells) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        let shells = shells::enumerate_shells(r_max)?;
        let members = shells.iter().map(|s| s.members().collect()).collect();
        *o = Box::into_raw(Box::new(HexlatShells { shells, members }));
        Ok(())
    })
}

/// Number of shells, or 0 for a null handle.
///
/// # Safety
/// `shells` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hexlat_shells_count(shells: *const HexlatShells) -> usize {
    shells.as_ref().map_or(0, |s| s.shells.len())
}

unsafe fn shell_at<'a>(shells: *const HexlatShells, index: usize) -> Result<(&'a ShellIndexSet, &'a [IndexPair]), Fail> {
    let s = shells.as_ref().ok_or_else(|| null("shells"))?;
    match s.shells.get(index) {
        Some(set) => Ok((set, &s.members[index])),
        None => Err(Fail(HexlatStatus::OutOfRange, format!("shell {index} out of range (count {})", s.shells.len()))),
    }
}

/// Radius and member count of shell `index`.
///
/// # Safety
/// `shells` must be a live handle; out-pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hexlat_shells_info(
    shells: *const HexlatShells,
    index: usize,
    radius: *mut f64,
    size: *mut usize,
) -> HexlatStatus {
    guard(|| {
        let (set, members) = shell_at(shells, index)?;
        *slot(radius, "radius")? = set.radius;
        *slot(size, "size")? = members.len();
        Ok(())
    })
}

/// Member `member` of shell `index`; members of one rotation triple are
/// adjacent and `triple` receives the triple's position in the shell.
///
/// # Safety
/// `shells` must be a live handle; `k`, `l` must be writable, `triple` may be null.
#[no_mangle]
pub unsafe extern "C" fn hexlat_shells_member(
    shells: *const HexlatShells,
    index: usize,
    member: usize,
    k: *mut i64,
    l: *mut i64,
    triple: *mut usize,
) -> HexlatStatus {
    guard(|| {
        let (_, members) = shell_at(shells, index)?;
        let q = members.get(member).ok_or_else(|| {
            Fail(HexlatStatus::OutOfRange, format!("member {member} out of range (size {})", members.len()))
        })?;
        *slot(k, "k")? = q.k;
        *slot(l, "l")? = q.l;
        if let Some(t) = triple.as_mut() {
            *t = member / 3;
        }
        Ok(())
    })
}

/// # Safety
/// `shells` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hexlat_shells_free(shells: *mut HexlatShells) {
    if !shells.is_null() {
        drop(Box::from_raw(shells));
    }
}

/// Parses a kernel spec such as `default` or `gauss:rate=2,c=1.5`.
///
/// # Safety
/// `spec` must be null or a NUL-terminated string; `out` must be null or
/// writable. The handle is released with [`hexlat_kernel_free`].
#[no_mangle]
pub unsafe extern "C" fn hexlat_kernel_parse(spec: *const c_char, out: *mut *mut HexlatKernel) -> HexlatStatus {
    guard(|| {
        let o = slot(out, "out")?;
        if spec.is_null() {
            return Err(null("spec"));
        }
        let s = CStr::from_ptr(spec)
            .to_str()
            .map_err(|e| Fail(HexlatStatus::InvalidUtf8, format!("kernel spec: {e}")))?;
        let kernel = RadialKernel::parse(s)?;
        *o = Box::into_raw(Box::new(HexlatKernel { kernel }));
        Ok(())
    })
}

/// Writes `f(r), f'(r), f''(r)` to `out[0..3]`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hexlat_kernel_eval(kernel: *const HexlatKernel, r: f64, out: *mut f64) -> HexlatStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = k.kernel.eval_all(r);
        ptr::copy_nonoverlapping(v.as_ptr(), out, 3);
        Ok(())
    })
}

/// Support radius; infinite for non-compact kernels, NaN for a null handle.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hexlat_kernel_support(kernel: *const HexlatKernel) -> f64 {
    kernel.as_ref().map_or(f64::NAN, |k| k.kernel.support_radius)
}

/// # Safety
/// `kernel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hexlat_kernel_free(kernel: *mut HexlatKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Admissibility against the kernel's own constants. `violated` receives
/// the failed condition number, or 0 when `passed` is true.
///
/// # Safety
/// `kernel` must be a live handle; `passed` must be writable, `violated` may be null.
#[no_mangle]
pub unsafe extern "C" fn hexlat_kernel_admissible(
    kernel: *const HexlatKernel,
    passed: *mut bool,
    violated: *mut u8,
) -> HexlatStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let p = slot(passed, "passed")?;
        let cert = variational::check_admissible_default(&k.kernel)?;
        *p = cert.passed;
        if let Some(v) = violated.as_mut() {
            *v = cert.violation.map_or(0, |v| v.condition);
        }
        Ok(())
    })
}

/// Lattice sum of the kernel over the lattice `(x, y)` shifted by `z`.
///
/// # Safety
/// `kernel` must be a live handle; `z` must point to two doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hexlat_lattice_sum(
    kernel: *const HexlatKernel,
    x: f64,
    y: f64,
    z: *const f64,
    out: *mut f64,
) -> HexlatStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if z.is_null() {
            return Err(null("z"));
        }
        let o = slot(out, "out")?;
        let zz = [*z, *z.add(1)];
        *o = variational::lattice_sum(&Basis::from_params(x, y)?, &k.kernel, zz)?;
        Ok(())
    })
}

/// Minimum of the lattice sum over one fundamental cell.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hexlat_minimize(
    kernel: *const HexlatKernel,
    x: f64,
    y: f64,
    coarse_n: usize,
    refine_iters: usize,
    out: *mut HexlatMinimum,
) -> HexlatStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let o = slot(out, "out")?;
        let m = variational::minimize_over_cell(&Basis::from_params(x, y)?, &k.kernel, coarse_n, refine_iters)?;
        *o = HexlatMinimum {
            argmin: m.argmin,
            cell: [m.cell.0, m.cell.1],
            value: m.value,
            grid_resolution: m.grid_resolution,
        };
        Ok(())
    })
}
