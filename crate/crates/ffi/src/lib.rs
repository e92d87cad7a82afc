//! C ABI over `tensor_phase`.
//!
//! Tensors and systems cross the boundary as opaque handles that the caller
//! frees with the matching `*_free`. Every function returns a [`TpStatus`];
//! on failure [`tp_last_error`] describes the most recent error on the
//! calling thread. Panics are caught and reported as `TP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use tensor_phase::control::{self, FrequencyGrid, LoopVerdict, MltiSystem, Verdict};
use tensor_phase::error::Error;
use tensor_phase::phase::{self, ClassifyOptions, SectorialClass};
use tensor_phase::tensor::{self, DenseTensor, Shape};

/// Result code of every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullArgument = 1,
    Shape = 2,
    Range = 3,
    Singular = 4,
    NotSectorial = 5,
    Domain = 6,
    Precondition = 7,
    Numeric = 8,
    Format = 9,
    Pole = 10,
    IllPosed = 11,
    Size = 12,
    /// Output buffer too small; the needed length was still written.
    BufferTooSmall = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TpClass {
    Sectorial = 0,
    QuasiSectorial = 1,
    SemiSectorial = 2,
    Indefinite = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TpVerdict {
    Pass = 0,
    Fail = 1,
    Inapplicable = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TpLoop {
    Stable = 0,
    Unstable = 1,
    IllPosed = 2,
}

/// Opaque even-order (or general) tensor.
pub struct TpTensor(DenseTensor);

/// Opaque MLTI state-space system.
pub struct TpSystem(MltiSystem);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TpStatus {
    match e {
        Error::Shape(_) => TpStatus::Shape,
        Error::Range(_) => TpStatus::Range,
        Error::Singular { .. } | Error::RankDeficient(_) => TpStatus::Singular,
        Error::NotSectorial => TpStatus::NotSectorial,
        Error::Domain(_) => TpStatus::Domain,
        Error::Precondition(_) => TpStatus::Precondition,
        Error::NotPositiveDefinite { .. } | Error::Numeric(_) => TpStatus::Numeric,
        Error::Format(_) => TpStatus::Format,
        Error::Pole(_) => TpStatus::Pole,
        Error::IllPosed(_) => TpStatus::IllPosed,
        Error::Size(_) => TpStatus::Size,
    }
}

struct Fail(TpStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_last_error(&e.to_string());
        Fail(status_of(&e))
    }
}

fn null(what: &str) -> Fail {
    set_last_error(&format!("{what} is null"));
    Fail(TpStatus::NullArgument)
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            TpStatus::Ok
        }
        Ok(Err(Fail(s))) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            TpStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn input_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::from(Error::Format(format!("{what} is not UTF-8"))))
}

fn give<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a tensor from split real and imaginary parts in storage order.
///
/// # Safety
/// Array arguments must point to at least the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_new(
    row_dims: *const usize,
    n_row: usize,
    col_dims: *const usize,
    n_col: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    result: *mut *mut TpTensor,
) -> TpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let shape = Shape::new(
            input_slice(row_dims, n_row, "row_dims")?.to_vec(),
            input_slice(col_dims, n_col, "col_dims")?.to_vec(),
        )?;
        let re = input_slice(re, len, "re")?;
        let im = input_slice(im, len, "im")?;
        let data = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        give(result, TpTensor(DenseTensor::new(shape, data)?));
        Ok(())
    })
}

/// # Safety
/// `dims` must point to `n` elements.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_identity(dims: *const usize, n: usize, result: *mut *mut TpTensor) -> TpStatus {
    guard(|| {
        let result = out(result, "result")?;
        give(result, TpTensor(DenseTensor::identity(input_slice(dims, n, "dims")?)?));
        Ok(())
    })
}

/// Parses the JSON tensor format.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_from_json(json: *const c_char, result: *mut *mut TpTensor) -> TpStatus {
    guard(|| {
        let result = out(result, "result")?;
        give(result, TpTensor(tensor::tensor_from_json(input_str(json, "json")?)?));
        Ok(())
    })
}

/// Serializes to the JSON tensor format; release with [`tp_string_free`].
///
/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_to_json(t: *const TpTensor, result: *mut *mut c_char) -> TpStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        let result = out(result, "result")?;
        *result = CString::new(tensor::tensor_to_json(&t.0)).expect("JSON has no NULs").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn tp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `t` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_free(t: *mut TpTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Row and column counts of the unfolding.
///
/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_size(t: *const TpTensor, rows: *mut usize, cols: *mut usize) -> TpStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        *out(rows, "rows")? = t.0.shape().rows();
        *out(cols, "cols")? = t.0.shape().cols();
        Ok(())
    })
}

/// Copies the entries in storage order into `re`/`im` of capacity `cap`.
///
/// # Safety
/// `re` and `im` must have room for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn tp_tensor_data(t: *const TpTensor, re: *mut f64, im: *mut f64, cap: usize, len: *mut usize) -> TpStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        let data = t.0.data();
        *out(len, "len")? = data.len();
        if cap < data.len() {
            set_last_error(&format!("buffer holds {cap} entries, {} needed", data.len()));
            return Err(Fail(TpStatus::BufferTooSmall));
        }
        if data.is_empty() {
            return Ok(());
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        for (k, z) in data.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// `A *_N B`.
///
/// # Safety
/// `a` and `b` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn tp_einstein_product(a: *const TpTensor, b: *const TpTensor, result: *mut *mut TpTensor) -> TpStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let result = out(result, "result")?;
        give(result, TpTensor(a.0.einstein_product(&b.0)?));
        Ok(())
    })
}

/// Sectoriality class and field angle.
///
/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_classify(t: *const TpTensor, class: *mut TpClass, field_angle: *mut f64) -> TpStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        let r = phase::classify(&t.0, ClassifyOptions::default())?;
        *out(class, "class")? = match r.class {
            SectorialClass::Sectorial => TpClass::Sectorial,
            SectorialClass::QuasiSectorial => TpClass::QuasiSectorial,
            SectorialClass::SemiSectorial => TpClass::SemiSectorial,
            SectorialClass::Indefinite => TpClass::Indefinite,
        };
        *out(field_angle, "field_angle")? = r.field_angle;
        Ok(())
    })
}

/// Phases sorted descending into `phases` (capacity `cap`) and their
/// center. `len` receives the phase count even when the buffer is short.
///
/// # Safety
/// `phases` must have room for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn tp_phases(t: *const TpTensor, phases: *mut f64, cap: usize, len: *mut usize, gamma: *mut f64) -> TpStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        let p = phase::phases(&t.0)?;
        *out(len, "len")? = p.len();
        *out(gamma, "gamma")? = p.gamma;
        if cap < p.len() {
            set_last_error(&format!("buffer holds {cap} phases, {} needed", p.len()));
            return Err(Fail(TpStatus::BufferTooSmall));
        }
        if phases.is_null() {
            return Err(null("phases"));
        }
        ptr::copy_nonoverlapping(p.phases.as_ptr(), phases, p.len());
        Ok(())
    })
}

/// Parses `{"A","B","C","D"}` system JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tp_system_from_json(json: *const c_char, result: *mut *mut TpSystem) -> TpStatus {
    guard(|| {
        let result = out(result, "result")?;
        give(result, TpSystem(MltiSystem::from_json(input_str(json, "json")?)?));
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn tp_system_free(s: *mut TpSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Peak gain over `points` log-spaced frequencies in `[1e−3, 1e3]`, plus 0
/// and ∞.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_hinf_norm(s: *const TpSystem, points: usize, value: *mut f64, omega: *mut f64) -> TpStatus {
    guard(|| {
        let s = deref(s, "system")?;
        let n = control::hinf_norm(&s.0, &FrequencyGrid::with_points(points)?)?;
        *out(value, "value")? = n.value;
        *out(omega, "omega")? = n.omega;
        Ok(())
    })
}

/// Small phase verdict and closed-loop oracle for the loop of `g` and `h`.
///
/// # Safety
/// `g` and `h` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn tp_small_phase_check(
    g: *const TpSystem,
    h: *const TpSystem,
    points: usize,
    verdict: *mut TpVerdict,
    oracle: *mut TpLoop,
) -> TpStatus {
    guard(|| {
        let (g, h) = (deref(g, "g")?, deref(h, "h")?);
        let r = control::small_phase_check(&g.0, &h.0, &FrequencyGrid::with_points(points)?)?;
        *out(verdict, "verdict")? = match r.small_phase.expect("phase criterion ran") {
            Verdict::Pass => TpVerdict::Pass,
            Verdict::Fail => TpVerdict::Fail,
            Verdict::Inapplicable => TpVerdict::Inapplicable,
        };
        *out(oracle, "oracle")? = match r.oracle {
            LoopVerdict::Stable => TpLoop::Stable,
            LoopVerdict::Unstable => TpLoop::Unstable,
            LoopVerdict::IllPosed => TpLoop::IllPosed,
        };
        Ok(())
    })
}
