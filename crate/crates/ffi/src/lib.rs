//! C ABI over `dispersion-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` style
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`DispersionStatus`]; on failure a description is available from
//! [`dispersion_last_error_message`] on the same thread until the next call.
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dispersion_core::greedy::{knapsack_curve, mwis_curve, DegreeMode, KnapsackInstance, MwisInstance};
use dispersion_core::online::{lambda_full_info, lambda_private, Forecaster};
use dispersion_core::private::exp_mech_1d;
use dispersion_core::{Domain, Error, PieceForm, PiecewiseFn1D, UtilityCurve};

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed function or instance data.
    InvalidInput = 2,
    OutOfDomain = 3,
    /// Parameters such as lambda, epsilon or the geometry are out of range.
    BadParameter = 4,
    /// Curve values outside `[0, H]`.
    RangeViolation = 5,
    NumericOverflow = 6,
    TooLarge = 7,
    Internal = 99,
}

/// Opaque piecewise constant/affine function of one parameter.
pub struct DispersionFn {
    inner: PiecewiseFn1D,
}

/// Opaque exponentially weighted forecaster.
pub struct DispersionForecaster {
    inner: Forecaster,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DispersionStatus {
    use DispersionStatus as S;
    match e {
        Error::OutOfDomain { .. } | Error::IntervalOutOfDomain { .. } => S::OutOfDomain,
        Error::RangeViolation { .. } | Error::PayoffOutOfRange { .. } => S::RangeViolation,
        Error::NonFiniteMass => S::NumericOverflow,
        Error::TooLarge { .. } | Error::NetTooLarge { .. } => S::TooLarge,
        Error::BadGeometry { .. } | Error::BadPrivacyParams(_) | Error::BadParams(_) | Error::BadKappa(_) => {
            S::BadParameter
        }
        Error::Io(_) => S::Internal,
        _ => S::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (DispersionStatus, String)>>(f: F) -> DispersionStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DispersionStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DispersionStatus::Internal
        }
    }
}

fn core<T>(r: dispersion_core::Result<T>) -> Result<T, (DispersionStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DispersionStatus, String) {
    (DispersionStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (DispersionStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (DispersionStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (DispersionStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handles<'a>(
    fns: *const *const DispersionFn,
    count: usize,
) -> Result<Vec<&'a PiecewiseFn1D>, (DispersionStatus, String)> {
    slice(fns, count, "fns")?
        .iter()
        .map(|&p| handle(p, "function handle").map(|h| &h.inner))
        .collect()
}

fn boxed_fn(inner: PiecewiseFn1D) -> *mut DispersionFn {
    Box::into_raw(Box::new(DispersionFn { inner }))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dispersion_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a function on `[lo, hi]` with `n_breakpoints` interior
/// breakpoints and `n_breakpoints + 1` pieces `slope * rho + intercept`.
/// A zero slope gives a constant piece.
///
/// # Safety
/// `breakpoints` must hold `n_breakpoints` values, `slopes` and
/// `intercepts` `n_breakpoints + 1` each; `out_fn` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_new(
    lo: f64,
    hi: f64,
    breakpoints: *const f64,
    n_breakpoints: usize,
    slopes: *const f64,
    intercepts: *const f64,
    out_fn: *mut *mut DispersionFn,
) -> DispersionStatus {
    guard(|| {
        let out_fn = out(out_fn, "out_fn")?;
        let bps = slice(breakpoints, n_breakpoints, "breakpoints")?.to_vec();
        let slopes = slice(slopes, n_breakpoints + 1, "slopes")?;
        let intercepts = slice(intercepts, n_breakpoints + 1, "intercepts")?;
        let forms = slopes
            .iter()
            .zip(intercepts)
            .map(|(&s, &c)| {
                if s == 0.0 {
                    PieceForm::Constant(c)
                } else {
                    PieceForm::Affine { slope: s, intercept: c }
                }
            })
            .collect();
        let f = core(Domain::new(lo, hi).and_then(|d| PiecewiseFn1D::new(d, bps, forms)))?;
        *out_fn = boxed_fn(f);
        Ok(())
    })
}

/// Releases a function handle. Null is ignored.
///
/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_free(f: *mut DispersionFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of pieces.
///
/// # Safety
/// `f` must be a live handle; `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_piece_count(f: *const DispersionFn, out_count: *mut usize) -> DispersionStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(f, "f")?.inner.pieces().len();
        Ok(())
    })
}

/// # Safety
/// `f` must be a live handle; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_eval(f: *const DispersionFn, rho: f64, out_value: *mut f64) -> DispersionStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = core(handle(f, "f")?.inner.eval(rho))?;
        Ok(())
    })
}

/// Sum of `count` functions over a common domain. `count == 0` is an error
/// here since the domain would be unknown.
///
/// # Safety
/// `fns` must hold `count` live handles; `out_fn` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_sum(
    fns: *const *const DispersionFn,
    count: usize,
    out_fn: *mut *mut DispersionFn,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        let refs = handles(fns, count)?;
        let first = refs
            .first()
            .ok_or((DispersionStatus::InvalidInput, "need at least one function".to_string()))?;
        *o = boxed_fn(core(PiecewiseFn1D::sum(first.domain(), &refs))?);
        Ok(())
    })
}

/// A maximizer and the maximum value. Constant pieces report their
/// midpoint; increasing affine pieces the largest point they contain.
///
/// # Safety
/// `f` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_argmax(
    f: *const DispersionFn,
    out_rho: *mut f64,
    out_value: *mut f64,
) -> DispersionStatus {
    guard(|| {
        let (r, v) = (out(out_rho, "out_rho")?, out(out_value, "out_value")?);
        (*r, *v) = handle(f, "f")?.inner.argmax();
        Ok(())
    })
}

/// `integral_a^b exp(lambda f)`.
///
/// # Safety
/// `f` must be a live handle; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_exp_integral(
    f: *const DispersionFn,
    lambda: f64,
    a: f64,
    b: f64,
    out_value: *mut f64,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = core(handle(f, "f")?.inner.exp_integral(lambda, a, b))?;
        Ok(())
    })
}

/// One exact draw from the density proportional to `exp(lambda f)`, using a
/// generator seeded with `seed`.
///
/// # Safety
/// `f` must be a live handle; `out_rho` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_sample(
    f: *const DispersionFn,
    lambda: f64,
    seed: u64,
    out_rho: *mut f64,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_rho, "out_rho")?;
        *o = core(
            handle(f, "f")?
                .inner
                .sample_exp(lambda, &mut ChaCha8Rng::seed_from_u64(seed)),
        )?;
        Ok(())
    })
}

/// JSON text of the function; release it with [`dispersion_string_free`].
///
/// # Safety
/// `f` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_fn_to_json(f: *const DispersionFn, out_json: *mut *mut c_char) -> DispersionStatus {
    guard(|| {
        let o = out(out_json, "out_json")?;
        let text =
            serde_json::to_string(&handle(f, "f")?.inner).map_err(|e| (DispersionStatus::Internal, e.to_string()))?;
        *o = CString::new(text)
            .map_err(|e| (DispersionStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dispersion_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Utility curve of the parameterized knapsack greedy on `[0, b]`.
///
/// # Safety
/// `values` and `sizes` must hold `n` entries; `out_fn` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_knapsack_curve(
    values: *const f64,
    sizes: *const f64,
    n: usize,
    capacity: f64,
    b: f64,
    out_fn: *mut *mut DispersionFn,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        let inst = core(KnapsackInstance::new(
            slice(values, n, "values")?.to_vec(),
            slice(sizes, n, "sizes")?.to_vec(),
            capacity,
        ))?;
        *o = boxed_fn(core(knapsack_curve(&inst, b))?.func);
        Ok(())
    })
}

/// Utility curve of the parameterized MWIS greedy on `[0, b]`. `edges`
/// holds `n_edges` vertex pairs flattened; `residual_degrees` selects the
/// degree rule.
///
/// # Safety
/// `weights` must hold `n` entries and `edges` `2 * n_edges`; `out_fn` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_mwis_curve(
    weights: *const f64,
    n: usize,
    edges: *const usize,
    n_edges: usize,
    b: f64,
    residual_degrees: bool,
    out_fn: *mut *mut DispersionFn,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        let flat = slice(edges, 2 * n_edges, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let inst = core(MwisInstance::new(slice(weights, n, "weights")?.to_vec(), &pairs))?;
        let mode = if residual_degrees {
            DegreeMode::Residual
        } else {
            DegreeMode::Original
        };
        *o = boxed_fn(core(mwis_curve(&inst, b, mode))?.func);
        Ok(())
    })
}

/// `sqrt(d ln(R/w) / T) / H`.
///
/// # Safety
/// `out_lambda` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_lambda_full_info(
    d: usize,
    r: f64,
    w: f64,
    t: usize,
    h: f64,
    out_lambda: *mut f64,
) -> DispersionStatus {
    guard(|| {
        *out(out_lambda, "out_lambda")? = core(lambda_full_info(d, r, w, t, h))?;
        Ok(())
    })
}

/// `eps / (4 H sqrt(2 T ln(1/delta)))`.
///
/// # Safety
/// `out_lambda` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_lambda_private(
    eps: f64,
    delta: f64,
    t: usize,
    h: f64,
    out_lambda: *mut f64,
) -> DispersionStatus {
    guard(|| {
        *out(out_lambda, "out_lambda")? = core(lambda_private(eps, delta, t, h))?;
        Ok(())
    })
}

/// Forecaster on `[lo, hi]` with temperature `lambda` and range bound `h`.
///
/// # Safety
/// `out_forecaster` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_forecaster_new(
    lo: f64,
    hi: f64,
    lambda: f64,
    h: f64,
    seed: u64,
    out_forecaster: *mut *mut DispersionForecaster,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_forecaster, "out_forecaster")?;
        let inner = core(Domain::new(lo, hi).and_then(|d| Forecaster::new(d, lambda, h, seed)))?;
        *o = Box::into_raw(Box::new(DispersionForecaster { inner }));
        Ok(())
    })
}

/// Releases a forecaster. Null is ignored.
///
/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dispersion_forecaster_free(f: *mut DispersionForecaster) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Samples the next parameter.
///
/// # Safety
/// `f` must be a live handle; `out_rho` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_forecaster_play(
    f: *mut DispersionForecaster,
    out_rho: *mut f64,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_rho, "out_rho")?;
        let fc = f.as_mut().ok_or_else(|| null("forecaster"))?;
        *o = core(fc.inner.play())?;
        Ok(())
    })
}

/// Adds the round's utility curve, which must lie in `[0, H]` on the
/// forecaster's domain.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn dispersion_forecaster_update(
    f: *mut DispersionForecaster,
    curve: *const DispersionFn,
) -> DispersionStatus {
    guard(|| {
        let fc = f.as_mut().ok_or_else(|| null("forecaster"))?;
        let func = handle(curve, "curve")?.inner.clone();
        let c = core(UtilityCurve::new(func, fc.inner.h_bound(), "ffi"))?;
        core(fc.inner.update(&c))
    })
}

/// One draw of the exponential mechanism with `lambda = eps / (2H)` on the
/// sum of `count` curves, each in `[0, h]`.
///
/// # Safety
/// `fns` must hold `count` live handles; `out_rho` writable.
#[no_mangle]
pub unsafe extern "C" fn dispersion_exp_mech_1d(
    fns: *const *const DispersionFn,
    count: usize,
    eps: f64,
    h: f64,
    seed: u64,
    out_rho: *mut f64,
) -> DispersionStatus {
    guard(|| {
        let o = out(out_rho, "out_rho")?;
        let curves = handles(fns, count)?
            .into_iter()
            .map(|f| core(UtilityCurve::new(f.clone(), h, "ffi")))
            .collect::<Result<Vec<_>, _>>()?;
        *o = core(exp_mech_1d(&curves, eps, h, &mut ChaCha8Rng::seed_from_u64(seed)))?;
        Ok(())
    })
}
