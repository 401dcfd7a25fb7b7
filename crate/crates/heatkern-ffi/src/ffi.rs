//! Exported C functions. Every fallible call returns an `HkStatus`; the
//! last error message is kept per thread and can be copied out with
//! `hk_last_error_message`.

use heatkern::convolution::{admissible_mesh, convolution_product, convolve, Partition};
use heatkern::error::Error;
use heatkern::geometry::{ManifoldModel, Point, QuadratureGrid};
use heatkern::kernels::{
    approximate_kernel, euclidean_kernel, expansion_remainder, heat_coefficient,
    reference_kernel, CutoffProfile, KernelMatrix, OperatorSpec, TrigPolynomial,
};
use heatkern::laplace::{cut_locus_coefficient, CutLocusOptions};
use heatkern::transmutation::{cosine_transmute_check, gaussian_weight, riesz_identity_check};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::sync::Arc;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CutPair = 3,
    NonpositiveTime = 4,
    ResolutionTooSmall = 5,
    OrderUnsupported = 6,
    TruncationNotConverged = 7,
    GridMismatch = 8,
    QuadratureNotConverged = 9,
    DimensionTooLarge = 10,
    DegenerateHessian = 11,
    NegativeEigenvalue = 12,
    PartitionTooCoarse = 13,
    BadTimeOrder = 14,
    InsufficientPoints = 15,
    OperatorModelMismatch = 16,
    OracleMismatch = 17,
    IoError = 18,
    InternalError = 19,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> HkStatus {
    match err {
        Error::CutPair { .. } => HkStatus::CutPair,
        Error::NonpositiveTime(_) => HkStatus::NonpositiveTime,
        Error::ResolutionTooSmall(_) => HkStatus::ResolutionTooSmall,
        Error::OrderUnsupported { .. } | Error::UnsupportedOrder(_) => HkStatus::OrderUnsupported,
        Error::TruncationNotConverged { .. } => HkStatus::TruncationNotConverged,
        Error::GridMismatch => HkStatus::GridMismatch,
        Error::InsufficientPoints(_) => HkStatus::InsufficientPoints,
        Error::BadTimeOrder { .. } => HkStatus::BadTimeOrder,
        Error::QuadratureNotConverged { .. } => HkStatus::QuadratureNotConverged,
        Error::DimensionTooLarge(_) => HkStatus::DimensionTooLarge,
        Error::DegenerateHessian { .. } => HkStatus::DegenerateHessian,
        Error::NegativeEigenvalue(_) => HkStatus::NegativeEigenvalue,
        Error::PartitionTooCoarse { .. } => HkStatus::PartitionTooCoarse,
        Error::InvalidPartition(_) | Error::InvalidArgument(_) | Error::Config(_) => {
            HkStatus::InvalidArgument
        }
        Error::OperatorModelMismatch { .. } => HkStatus::OperatorModelMismatch,
        Error::OracleMismatch { .. } => HkStatus::OracleMismatch,
        Error::Io(_) => HkStatus::IoError,
    }
}

fn fail(err: Error) -> HkStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Copy the last error message into `buf` (truncated, always NUL-terminated
/// when cap > 0). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null with cap 0.
#[no_mangle]
pub unsafe extern "C" fn hk_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Opaque model-manifold handle.
pub struct HkManifold(ManifoldModel);
/// Opaque operator handle.
pub struct HkOperator(OperatorSpec);
/// Opaque quadrature-grid handle.
pub struct HkGrid(Arc<QuadratureGrid>);
/// Opaque kernel-matrix handle.
pub struct HkKernel(KernelMatrix);

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> HkStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return HkStatus::NullPointer;
    }
    *out = Box::into_raw(Box::new(value));
    HkStatus::Ok
}

macro_rules! deref {
    ($ptr:expr) => {
        match $ptr.as_ref() {
            Some(r) => r,
            None => {
                set_error("null handle".into());
                return HkStatus::NullPointer;
            }
        }
    };
}

macro_rules! out_slot {
    ($ptr:expr) => {
        match $ptr.as_mut() {
            Some(r) => r,
            None => {
                set_error("null output pointer".into());
                return HkStatus::NullPointer;
            }
        }
    };
}

/// # Safety
/// `out` must be a valid pointer to a pointer slot.
#[no_mangle]
pub unsafe extern "C" fn hk_manifold_circle(radius: f64, out: *mut *mut HkManifold) -> HkStatus {
    if radius <= 0.0 || !radius.is_finite() {
        return fail(Error::InvalidArgument(format!("radius {radius}")));
    }
    write_out(out, HkManifold(ManifoldModel::circle(radius)))
}

/// # Safety
/// `out` must be a valid pointer to a pointer slot.
#[no_mangle]
pub unsafe extern "C" fn hk_manifold_torus(
    l1: f64,
    l2: f64,
    out: *mut *mut HkManifold,
) -> HkStatus {
    if l1 <= 0.0 || l2 <= 0.0 || !l1.is_finite() || !l2.is_finite() {
        return fail(Error::InvalidArgument(format!("lengths {l1}, {l2}")));
    }
    write_out(out, HkManifold(ManifoldModel::torus(l1, l2)))
}

/// # Safety
/// `out` must be a valid pointer to a pointer slot.
#[no_mangle]
pub unsafe extern "C" fn hk_manifold_sphere(radius: f64, out: *mut *mut HkManifold) -> HkStatus {
    if radius <= 0.0 || !radius.is_finite() {
        return fail(Error::InvalidArgument(format!("radius {radius}")));
    }
    write_out(out, HkManifold(ManifoldModel::sphere(radius)))
}

/// # Safety
/// `m` must come from an hk_manifold_* constructor (or be null).
#[no_mangle]
pub unsafe extern "C" fn hk_manifold_free(m: *mut HkManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn hk_manifold_constants(
    m: *const HkManifold,
    dim: *mut usize,
    inj: *mut f64,
    diam: *mut f64,
    vol: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let c = m.0.constants();
    if let Some(d) = dim.as_mut() {
        *d = c.dim;
    }
    if let Some(v) = inj.as_mut() {
        *v = c.inj;
    }
    if let Some(v) = diam.as_mut() {
        *v = c.diam;
    }
    if let Some(v) = vol.as_mut() {
        *v = c.vol;
    }
    HkStatus::Ok
}

/// # Safety
/// `m` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_distance(
    m: *const HkManifold,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let out = out_slot!(out);
    *out = m.0.distance(&Point([x0, x1]), &Point([y0, y1]));
    HkStatus::Ok
}

/// # Safety
/// `m` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_van_vleck_theta(
    m: *const HkManifold,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let out = out_slot!(out);
    match m.0.van_vleck_theta(&Point([x0, x1]), &Point([y0, y1])) {
        Ok(v) => {
            *out = v;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `out` must be a valid pointer to a pointer slot.
#[no_mangle]
pub unsafe extern "C" fn hk_operator_laplace(out: *mut *mut HkOperator) -> HkStatus {
    write_out(out, HkOperator(OperatorSpec::laplace()))
}

/// Schroedinger operator on the circle with a trig-polynomial potential
/// `a0 + sum_k cos_coeffs[k] cos((k+1) theta) + sin_coeffs[k] sin((k+1) theta)`.
///
/// # Safety
/// Coefficient pointers must point to arrays of the stated lengths (or be
/// null with length 0).
#[no_mangle]
pub unsafe extern "C" fn hk_operator_schroedinger(
    a0: f64,
    cos_coeffs: *const f64,
    n_cos: usize,
    sin_coeffs: *const f64,
    n_sin: usize,
    out: *mut *mut HkOperator,
) -> HkStatus {
    let cv = if cos_coeffs.is_null() {
        Vec::new()
    } else {
        std::slice::from_raw_parts(cos_coeffs, n_cos).to_vec()
    };
    let sv = if sin_coeffs.is_null() {
        Vec::new()
    } else {
        std::slice::from_raw_parts(sin_coeffs, n_sin).to_vec()
    };
    write_out(
        out,
        HkOperator(OperatorSpec::schroedinger(TrigPolynomial::new(a0, cv, sv))),
    )
}

/// # Safety
/// `op` must come from an hk_operator_* constructor (or be null).
#[no_mangle]
pub unsafe extern "C" fn hk_operator_free(op: *mut HkOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `m` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_grid_build(
    m: *const HkManifold,
    resolution: usize,
    out: *mut *mut HkGrid,
) -> HkStatus {
    let m = deref!(m);
    match m.0.build_grid(resolution) {
        Ok(g) => write_out(out, HkGrid(Arc::new(g))),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `g` must come from hk_grid_build (or be null).
#[no_mangle]
pub unsafe extern "C" fn hk_grid_free(g: *mut HkGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be valid; returns 0 for null.
#[no_mangle]
pub unsafe extern "C" fn hk_grid_size(g: *const HkGrid) -> usize {
    g.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn hk_grid_node(
    g: *const HkGrid,
    index: usize,
    c0: *mut f64,
    c1: *mut f64,
    weight: *mut f64,
) -> HkStatus {
    let g = deref!(g);
    if index >= g.0.len() {
        return fail(Error::InvalidArgument(format!(
            "node index {index} out of range {}",
            g.0.len()
        )));
    }
    if let Some(v) = c0.as_mut() {
        *v = g.0.nodes[index].0[0];
    }
    if let Some(v) = c1.as_mut() {
        *v = g.0.nodes[index].0[1];
    }
    if let Some(v) = weight.as_mut() {
        *v = g.0.weights[index];
    }
    HkStatus::Ok
}

/// # Safety
/// `m` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_euclidean_kernel(
    m: *const HkManifold,
    t: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let out = out_slot!(out);
    match euclidean_kernel(&m.0, t, &Point([x0, x1]), &Point([y0, y1])) {
        Ok(v) => {
            *out = v;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_heat_coefficient(
    m: *const HkManifold,
    op: *const HkOperator,
    order: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let op = deref!(op);
    let out = out_slot!(out);
    match heat_coefficient(&m.0, &op.0, order, &Point([x0, x1]), &Point([y0, y1])) {
        Ok(v) => {
            *out = v;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Approximate kernel with the model's default cutoff profile.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_approximate_kernel(
    m: *const HkManifold,
    op: *const HkOperator,
    nu: usize,
    t: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let op = deref!(op);
    let out = out_slot!(out);
    let profile = CutoffProfile::default_for(&m.0);
    match approximate_kernel(&m.0, &op.0, nu, &profile, t, &Point([x0, x1]), &Point([y0, y1])) {
        Ok(v) => {
            *out = v;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_expansion_remainder(
    m: *const HkManifold,
    op: *const HkOperator,
    nu: usize,
    t: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let op = deref!(op);
    let out = out_slot!(out);
    match expansion_remainder(&m.0, &op.0, nu, t, &Point([x0, x1]), &Point([y0, y1])) {
        Ok(v) => {
            *out = v;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_reference_kernel(
    m: *const HkManifold,
    op: *const HkOperator,
    t: f64,
    g: *const HkGrid,
    out: *mut *mut HkKernel,
) -> HkStatus {
    let m = deref!(m);
    let op = deref!(op);
    let g = deref!(g);
    match reference_kernel(&m.0, &op.0, t, &g.0) {
        Ok(k) => write_out(out, HkKernel(k)),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `k` must come from a kernel-producing call (or be null).
#[no_mangle]
pub unsafe extern "C" fn hk_kernel_free(k: *mut HkKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// # Safety
/// `k` must be valid; returns 0 for null.
#[no_mangle]
pub unsafe extern "C" fn hk_kernel_size(k: *const HkKernel) -> usize {
    k.as_ref().map_or(0, |k| k.0.n())
}

/// # Safety
/// `k` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_kernel_get(
    k: *const HkKernel,
    row: usize,
    col: usize,
    out: *mut f64,
) -> HkStatus {
    let k = deref!(k);
    let out = out_slot!(out);
    let n = k.0.n();
    if row >= n || col >= n {
        return fail(Error::InvalidArgument(format!(
            "entry ({row},{col}) out of range {n}"
        )));
    }
    *out = k.0.get(row, col);
    HkStatus::Ok
}

/// Write the kernel matrix in the CSV disk format.
///
/// # Safety
/// `k` must be valid and `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hk_kernel_write_csv(
    k: *const HkKernel,
    path: *const c_char,
) -> HkStatus {
    let k = deref!(k);
    if path.is_null() {
        set_error("null path".into());
        return HkStatus::NullPointer;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => return fail(Error::InvalidArgument("path is not UTF-8".into())),
    };
    let file = match std::fs::File::create(path) {
        Ok(f) => f,
        Err(e) => return fail(Error::Io(e.to_string())),
    };
    match k.0.write_csv(std::io::BufWriter::new(file)) {
        Ok(()) => HkStatus::Ok,
        Err(e) => fail(Error::Io(e.to_string())),
    }
}

/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_convolve(
    a: *const HkKernel,
    b: *const HkKernel,
    g: *const HkGrid,
    out: *mut *mut HkKernel,
) -> HkStatus {
    let a = deref!(a);
    let b = deref!(b);
    let g = deref!(g);
    match convolve(&a.0, &b.0, &g.0) {
        Ok(k) => write_out(out, HkKernel(k)),
        Err(e) => fail(e),
    }
}

/// Repeated convolution of approximate kernels over an equidistant
/// partition of [0, t] with `steps` increments, default cutoff profile.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_convolution_product(
    m: *const HkManifold,
    op: *const HkOperator,
    nu: usize,
    t: f64,
    steps: usize,
    g: *const HkGrid,
    out: *mut *mut HkKernel,
) -> HkStatus {
    let m = deref!(m);
    let op = deref!(op);
    let g = deref!(g);
    let profile = CutoffProfile::default_for(&m.0);
    let partition = match Partition::equidistant(t, steps) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match convolution_product(&m.0, &op.0, nu, &profile, &partition, &g.0) {
        Ok(k) => write_out(out, HkKernel(k)),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `m` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_admissible_mesh(
    m: *const HkManifold,
    safety: f64,
    out: *mut f64,
) -> HkStatus {
    let m = deref!(m);
    let out = out_slot!(out);
    if !(0.0 < safety && safety < 1.0) {
        return fail(Error::InvalidArgument(format!("safety {safety}")));
    }
    *out = admissible_mesh(&m.0, safety);
    HkStatus::Ok
}

/// # Safety
/// `out` pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_gaussian_weight(t: f64, s: f64, out: *mut f64) -> HkStatus {
    let out = out_slot!(out);
    match gaussian_weight(t, s) {
        Ok(v) => {
            *out = v;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `quad` and `exact` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_cosine_transmute_check(
    lambda: f64,
    t: f64,
    quad: *mut f64,
    exact: *mut f64,
) -> HkStatus {
    let quad = out_slot!(quad);
    let exact = out_slot!(exact);
    match cosine_transmute_check(lambda, t) {
        Ok((q, e)) => {
            *quad = q;
            *exact = e;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `lhs` and `rhs` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hk_riesz_identity_check(
    order: usize,
    t: f64,
    r: f64,
    lhs: *mut f64,
    rhs: *mut f64,
) -> HkStatus {
    let lhs = out_slot!(lhs);
    let rhs = out_slot!(rhs);
    match riesz_identity_check(order, t, r) {
        Ok((l, rr)) => {
            *lhs = l;
            *rhs = rr;
            HkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Leading cut-locus coefficients between two points, over an equidistant
/// partition of [0, 1] with `steps` increments. Writes up to `cap`
/// components into `dims`/`coeffs`, stores the count in `len`.
///
/// # Safety
/// Output arrays must hold at least `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn hk_cut_locus_leading(
    m: *const HkManifold,
    op: *const HkOperator,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    steps: usize,
    nu: usize,
    dims: *mut usize,
    coeffs: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HkStatus {
    let m = deref!(m);
    let op = deref!(op);
    let len = out_slot!(len);
    let partition = match Partition::equidistant(1.0, steps) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let comps = match cut_locus_coefficient(
        &m.0,
        &op.0,
        &Point([x0, x1]),
        &Point([y0, y1]),
        &partition,
        nu,
        &CutLocusOptions::default(),
    ) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    *len = comps.len();
    let n = comps.len().min(cap);
    if n > 0 && (dims.is_null() || coeffs.is_null()) {
        set_error("null output array".into());
        return HkStatus::NullPointer;
    }
    for (i, c) in comps.iter().take(n).enumerate() {
        *dims.add(i) = c.dim;
        *coeffs.add(i) = c.coefficient;
    }
    HkStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::ptr;

    #[test]
    fn manifold_roundtrip() {
        unsafe {
            let mut m: *mut HkManifold = ptr::null_mut();
            assert_eq!(hk_manifold_circle(1.0, &mut m), HkStatus::Ok);
            let mut dim = 0usize;
            let (mut inj, mut diam, mut vol) = (0.0, 0.0, 0.0);
            assert_eq!(
                hk_manifold_constants(m, &mut dim, &mut inj, &mut diam, &mut vol),
                HkStatus::Ok
            );
            assert_eq!(dim, 1);
            assert!((inj - PI).abs() < 1e-15);
            assert!((vol - 2.0 * PI).abs() < 1e-15);
            let mut d = 0.0;
            assert_eq!(hk_distance(m, 0.0, 0.0, PI, 0.0, &mut d), HkStatus::Ok);
            assert!((d - PI).abs() < 1e-14);
            hk_manifold_free(m);
        }
    }

    #[test]
    fn error_paths_set_message() {
        unsafe {
            let mut m: *mut HkManifold = ptr::null_mut();
            assert_eq!(hk_manifold_sphere(1.0, &mut m), HkStatus::Ok);
            let mut v = 0.0;
            // antipodal pair is a cut pair
            let status = hk_van_vleck_theta(m, 0.0, 0.0, PI, 0.0, &mut v);
            assert_eq!(status, HkStatus::CutPair);
            let mut buf = [0i8; 256];
            let n = hk_last_error_message(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
            let msg = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(msg.contains("cut pair"), "{msg}");
            hk_manifold_free(m);
        }
    }

    #[test]
    fn kernel_matrix_through_ffi() {
        unsafe {
            let mut m: *mut HkManifold = ptr::null_mut();
            assert_eq!(hk_manifold_circle(1.0, &mut m), HkStatus::Ok);
            let mut op: *mut HkOperator = ptr::null_mut();
            assert_eq!(hk_operator_laplace(&mut op), HkStatus::Ok);
            let mut g: *mut HkGrid = ptr::null_mut();
            assert_eq!(hk_grid_build(m, 16, &mut g), HkStatus::Ok);
            assert_eq!(hk_grid_size(g), 16);
            let mut k: *mut HkKernel = ptr::null_mut();
            assert_eq!(hk_reference_kernel(m, op, 30.0, g, &mut k), HkStatus::Ok);
            let mut v = 0.0;
            assert_eq!(hk_kernel_get(k, 0, 5, &mut v), HkStatus::Ok);
            assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-10);
            // out-of-range entry
            assert_eq!(
                hk_kernel_get(k, 16, 0, &mut v),
                HkStatus::InvalidArgument
            );
            // convolution product through the ABI
            let mut prod: *mut HkKernel = ptr::null_mut();
            assert_eq!(
                hk_convolution_product(m, op, 0, 0.5, 4, g, &mut prod),
                HkStatus::Ok
            );
            assert_eq!(hk_kernel_size(prod), 16);
            hk_kernel_free(prod);
            hk_kernel_free(k);
            hk_grid_free(g);
            hk_operator_free(op);
            hk_manifold_free(m);
        }
    }

    #[test]
    fn scalar_checks_through_ffi() {
        unsafe {
            let (mut q, mut e) = (0.0, 0.0);
            assert_eq!(hk_cosine_transmute_check(4.0, 0.5, &mut q, &mut e), HkStatus::Ok);
            assert!((q - (-2.0f64).exp()).abs() < 1e-10);
            let (mut lhs, mut rhs) = (0.0, 0.0);
            assert_eq!(
                hk_riesz_identity_check(1, 0.5, 1.0, &mut lhs, &mut rhs),
                HkStatus::Ok
            );
            assert!((lhs - rhs).abs() / rhs < 1e-9);
            assert_eq!(
                hk_riesz_identity_check(0, 0.5, 1.0, &mut lhs, &mut rhs),
                HkStatus::OrderUnsupported
            );
            let mut w = 0.0;
            assert_eq!(hk_gaussian_weight(0.25, 0.0, &mut w), HkStatus::Ok);
            assert!((w - PI.powf(-0.5)).abs() < 1e-14);
            assert_eq!(hk_gaussian_weight(-0.1, 0.0, &mut w), HkStatus::NonpositiveTime);
        }
    }

    #[test]
    fn cut_locus_through_ffi() {
        unsafe {
            let mut m: *mut HkManifold = ptr::null_mut();
            assert_eq!(hk_manifold_circle(1.0, &mut m), HkStatus::Ok);
            let mut op: *mut HkOperator = ptr::null_mut();
            assert_eq!(hk_operator_laplace(&mut op), HkStatus::Ok);
            let mut dims = [0usize; 4];
            let mut coeffs = [0.0f64; 4];
            let mut len = 0usize;
            let status = hk_cut_locus_leading(
                m,
                op,
                0.0,
                0.0,
                PI,
                0.0,
                6,
                1,
                dims.as_mut_ptr(),
                coeffs.as_mut_ptr(),
                4,
                &mut len,
            );
            assert_eq!(status, HkStatus::Ok);
            assert_eq!(len, 2);
            assert!((coeffs[0] + coeffs[1] - 2.0).abs() < 1e-6);
            hk_operator_free(op);
            hk_manifold_free(m);
        }
    }
}
