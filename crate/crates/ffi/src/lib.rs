//! C ABI for `mtmix`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every fallible call returns an
//! [`MtmixStatus`]; on failure a message is available from
//! [`mtmix_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mtmix::{Error, MixingMeasure, MtmConfig, MtmResult, Point};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtmixStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    Kernel = 3,
    EmptyMeasure = 4,
    InvalidMeasure = 5,
    Domain = 6,
    Config = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

/// Opaque handle to a mixing measure.
pub struct MtmixMeasure(MixingMeasure);

/// Opaque handle to the output of Merge-Truncate-Merge.
pub struct MtmixMtmResult(MtmResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> MtmixStatus {
    match err {
        Error::Dimension { .. } => MtmixStatus::Dimension,
        Error::Kernel(_) => MtmixStatus::Kernel,
        Error::EmptyMeasure => MtmixStatus::EmptyMeasure,
        Error::InvalidMeasure(_) => MtmixStatus::InvalidMeasure,
        Error::Domain(_) => MtmixStatus::Domain,
        Error::Config(_) => MtmixStatus::Config,
        Error::Io(_) => MtmixStatus::Io,
        Error::Parse(_) => MtmixStatus::Parse,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> MtmixStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtmixStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MtmixStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(format!("{} is null", stringify!($p)));
            return MtmixStatus::NullPointer;
        })+
    };
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mtmix_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a measure from `n` atoms in dimension `d`: `atoms` is row-major
/// `n * d`, `weights` has length `n` and must sum to 1.
///
/// # Safety
/// `atoms` and `weights` must point to arrays of the stated lengths; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_new(
    d: usize,
    n: usize,
    atoms: *const f64,
    weights: *const f64,
    out: *mut *mut MtmixMeasure,
) -> MtmixStatus {
    non_null!(atoms, weights, out);
    guard(|| {
        if d == 0 || n == 0 {
            return Err(Error::EmptyMeasure);
        }
        let coords = std::slice::from_raw_parts(atoms, n * d);
        let w = std::slice::from_raw_parts(weights, n).to_vec();
        let pts = coords.chunks(d).map(|c| Point::new(c.to_vec())).collect::<Result<Vec<_>, _>>()?;
        let g = MixingMeasure::new(pts, w)?;
        *out = Box::into_raw(Box::new(MtmixMeasure(g)));
        Ok(())
    })
}

/// Parses the JSON wire format `{"d": .., "atoms": [[..]], "weights": [..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_from_json(json: *const c_char, out: *mut *mut MtmixMeasure) -> MtmixStatus {
    non_null!(json, out);
    guard(|| {
        let s = CStr::from_ptr(json).to_str().map_err(|e| Error::Parse(e.to_string()))?;
        *out = Box::into_raw(Box::new(MtmixMeasure(MixingMeasure::from_json(s)?)));
        Ok(())
    })
}

/// Serializes to the JSON wire format. Free the string with
/// [`mtmix_string_free`].
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_to_json(m: *const MtmixMeasure, out: *mut *mut c_char) -> MtmixStatus {
    non_null!(m, out);
    guard(|| {
        let s = CString::new((*m).0.to_json()).map_err(|e| Error::Parse(e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn mtmix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `m` must be a handle from this library, or null. It is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_free(m: *mut MtmixMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of atoms; 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_len(m: *const MtmixMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Dimension of the atoms; 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_dim(m: *const MtmixMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Copies atoms (row-major, `len * dim` values) and weights (`len` values)
/// into caller buffers. Either buffer may be null to skip it.
///
/// # Safety
/// Non-null buffers must have room for the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn mtmix_measure_copy(m: *const MtmixMeasure, atoms: *mut f64, weights: *mut f64) -> MtmixStatus {
    non_null!(m);
    guard(|| {
        let g = &(*m).0;
        if !atoms.is_null() {
            let dst = std::slice::from_raw_parts_mut(atoms, g.len() * g.dim());
            for (chunk, a) in dst.chunks_mut(g.dim()).zip(g.atoms()) {
                chunk.copy_from_slice(a.coords());
            }
        }
        if !weights.is_null() {
            std::slice::from_raw_parts_mut(weights, g.len()).copy_from_slice(g.weights());
        }
        Ok(())
    })
}

/// `W_r(g, h)`.
///
/// # Safety
/// `g`, `h` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_wasserstein(
    g: *const MtmixMeasure,
    h: *const MtmixMeasure,
    r: f64,
    out: *mut f64,
) -> MtmixStatus {
    non_null!(g, h, out);
    guard(|| {
        *out = mtmix::wasserstein(&(*g).0, &(*h).0, r)?.distance;
        Ok(())
    })
}

/// `sqrt(ln ln n / ln n)`; fails for `n <= 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_omega_n(n: u64, out: *mut f64) -> MtmixStatus {
    non_null!(out);
    guard(|| {
        *out = mtmix::omega_n(n)?;
        Ok(())
    })
}

/// Runs Merge-Truncate-Merge.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_mtm(
    g: *const MtmixMeasure,
    omega: f64,
    c: f64,
    r: f64,
    seed: u64,
    out: *mut *mut MtmixMtmResult,
) -> MtmixStatus {
    non_null!(g, out);
    guard(|| {
        let cfg = MtmConfig::new(omega, c, r, seed)?;
        *out = Box::into_raw(Box::new(MtmixMtmResult(mtmix::mtm(&(*g).0, &cfg)?)));
        Ok(())
    })
}

/// Number of recovered components; 0 for a null handle.
///
/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mtmix_mtm_result_k_tilde(res: *const MtmixMtmResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.k_tilde)
}

/// New measure handle holding the estimate `G~`.
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_mtm_result_estimate(res: *const MtmixMtmResult, out: *mut *mut MtmixMeasure) -> MtmixStatus {
    non_null!(res, out);
    guard(|| {
        *out = Box::into_raw(Box::new(MtmixMeasure((*res).0.g_tilde.clone())));
        Ok(())
    })
}

/// New measure handle holding the stage-one merged measure `G'`.
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtmix_mtm_result_merged(res: *const MtmixMtmResult, out: *mut *mut MtmixMeasure) -> MtmixStatus {
    non_null!(res, out);
    guard(|| {
        *out = Box::into_raw(Box::new(MtmixMeasure((*res).0.merged_measure.clone())));
        Ok(())
    })
}

/// # Safety
/// `res` must be a handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn mtmix_mtm_result_free(res: *mut MtmixMtmResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
