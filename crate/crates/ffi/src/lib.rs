//! C ABI over the tomo-anm estimators.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns a
//! [`TomoStatus`]; on failure [`tomo_last_error`] describes the cause.
//! Complex samples are passed as interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_complex::Complex64;
use tomo_anm::bench::crlb_single_tone;
use tomo_anm::estimators::{Algorithm, EstimatorSpec};
use tomo_anm::io::read_slc_stack;
use tomo_anm::spectral::{CVector, LineSpectrum};
use tomo_anm::tomosar::{
    reconstruct_volume, AmplitudeFloor, ArrayGeometry, EstimatorChoice, PointCloud, SlcStack,
};
use tomo_anm::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    NotConverged = 4,
    Diverged = 5,
    Io = 6,
    Format = 7,
    Panic = 8,
}

/// Estimator with its configuration.
pub struct TomoEstimator {
    spec: EstimatorSpec,
}

/// Estimated line spectrum.
pub struct TomoSpectrum {
    inner: LineSpectrum,
}

/// SLC stack loaded from a file.
pub struct TomoStack {
    inner: SlcStack,
}

/// Reconstructed point cloud.
pub struct TomoCloud {
    inner: PointCloud,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TomoStatus {
    match e {
        Error::Domain(_) | Error::Shape { .. } | Error::Config { .. } | Error::ConfigParse(_) => {
            TomoStatus::InvalidArgument
        }
        Error::NotHermitian { .. } | Error::IllConditioned { .. } => TomoStatus::Numerical,
        Error::NotConverged { .. } => TomoStatus::NotConverged,
        Error::Divergence { .. } => TomoStatus::Diverged,
        Error::Io(_) => TomoStatus::Io,
        _ => TomoStatus::Format,
    }
}

/// Runs `f`, recording errors and panics for [`tomo_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (TomoStatus, String)>) -> TomoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            TomoStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TomoStatus::Panic
        }
    }
}

fn fail(e: Error) -> (TomoStatus, String) {
    (status_of(&e), e.to_string())
}

fn invalid(message: impl Into<String>) -> (TomoStatus, String) {
    (TomoStatus::InvalidArgument, message.into())
}

fn null(name: &str) -> (TomoStatus, String) {
    (TomoStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (TomoStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("`{name}` is not UTF-8")))
}

unsafe fn read_samples(p: *const f64, n: usize) -> Result<CVector, (TomoStatus, String)> {
    if p.is_null() {
        return Err(null("samples"));
    }
    let raw = std::slice::from_raw_parts(p, 2 * n);
    Ok(CVector::from_iterator(n, raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1]))))
}

fn out_ptr<T>(out: *mut *mut T, value: T) -> Result<(), (TomoStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tomo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an estimator with default settings for an `n`-element array.
///
/// `algorithm` is one of "ivdst-anm", "sdp-anm", "omp" or "ist";
/// `noise_sigma` is the per-element noise standard deviation (0 if unknown
/// or noiseless) and `k` the expected number of lines.
///
/// # Safety
/// `algorithm` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tomo_estimator_new(
    algorithm: *const c_char,
    n: usize,
    noise_sigma: f64,
    k: usize,
    out: *mut *mut TomoEstimator,
) -> TomoStatus {
    guard(|| {
        let algorithm: Algorithm = str_arg(algorithm, "algorithm")?.parse().map_err(fail)?;
        if n < 2 || k == 0 || k >= n {
            return Err(invalid(format!("need n >= 2 and 1 <= k < n, got n = {n}, k = {k}")));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(invalid(format!("noise_sigma must be non-negative, got {noise_sigma}")));
        }
        out_ptr(out, TomoEstimator {
            spec: EstimatorSpec::with_defaults(algorithm, n, noise_sigma, k),
        })
    })
}

/// Releases an estimator; null is ignored.
///
/// # Safety
/// `estimator` must come from [`tomo_estimator_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tomo_estimator_free(estimator: *mut TomoEstimator) {
    if !estimator.is_null() {
        drop(Box::from_raw(estimator));
    }
}

/// Estimates `k` lines from `n` interleaved complex samples.
///
/// # Safety
/// `samples` must point to `2 n` doubles; `estimator` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_estimate(
    estimator: *const TomoEstimator,
    samples: *const f64,
    n: usize,
    k: usize,
    out: *mut *mut TomoSpectrum,
) -> TomoStatus {
    guard(|| {
        let estimator = estimator.as_ref().ok_or_else(|| null("estimator"))?;
        let g = read_samples(samples, n)?;
        let spectrum = estimator.spec.estimate(&g, k).map_err(fail)?;
        out_ptr(out, TomoSpectrum { inner: spectrum })
    })
}

/// Number of lines; 0 for null.
///
/// # Safety
/// `spectrum` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_spectrum_len(spectrum: *const TomoSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.inner.len())
}

/// Frequency and complex amplitude of line `index`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_spectrum_line(
    spectrum: *const TomoSpectrum,
    index: usize,
    frequency: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> TomoStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let line = s
            .inner
            .lines
            .get(index)
            .ok_or_else(|| invalid(format!("line {index} out of {}", s.inner.len())))?;
        if frequency.is_null() || re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        *frequency = line.frequency;
        *re = line.amplitude.re;
        *im = line.amplitude.im;
        Ok(())
    })
}

/// Releases a spectrum; null is ignored.
///
/// # Safety
/// `spectrum` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tomo_spectrum_free(spectrum: *mut TomoSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Reads an SLC stack file acquired with the default array (0.11 m
/// spacing, 9.6 GHz, 1 km range, 45 degree view).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tomo_stack_read(path: *const c_char, out: *mut *mut TomoStack) -> TomoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let stack = read_slc_stack(Path::new(path), &ArrayGeometry::default()).map_err(fail)?;
        out_ptr(out, TomoStack { inner: stack })
    })
}

/// Channels, azimuth lines and range bins of a stack.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_stack_dims(
    stack: *const TomoStack,
    channels: *mut usize,
    azimuth: *mut usize,
    range: *mut usize,
) -> TomoStatus {
    guard(|| {
        let s = stack.as_ref().ok_or_else(|| null("stack"))?;
        if channels.is_null() || azimuth.is_null() || range.is_null() {
            return Err(null("output"));
        }
        *channels = s.inner.channels();
        *azimuth = s.inner.azimuth();
        *range = s.inner.range();
        Ok(())
    })
}

/// Releases a stack; null is ignored.
///
/// # Safety
/// `stack` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tomo_stack_free(stack: *mut TomoStack) {
    if !stack.is_null() {
        drop(Box::from_raw(stack));
    }
}

/// Reconstructs a point cloud with `algorithm` tuned per pixel, keeping
/// at most `k_max` lines per pixel above `noise_multiple` times the pixel's
/// estimated noise level.
///
/// # Safety
/// `algorithm` must be a NUL-terminated string; `stack` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_reconstruct(
    stack: *const TomoStack,
    algorithm: *const c_char,
    k_max: usize,
    noise_multiple: f64,
    out: *mut *mut TomoCloud,
) -> TomoStatus {
    guard(|| {
        let s = stack.as_ref().ok_or_else(|| null("stack"))?;
        let algorithm: Algorithm = str_arg(algorithm, "algorithm")?.parse().map_err(fail)?;
        let rec = reconstruct_volume(
            &s.inner,
            &EstimatorChoice::Adaptive(algorithm),
            k_max,
            AmplitudeFloor::NoiseMultiple(noise_multiple),
        )
        .map_err(fail)?;
        out_ptr(out, TomoCloud { inner: rec.cloud })
    })
}

/// Number of points; 0 for null.
///
/// # Safety
/// `cloud` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_cloud_len(cloud: *const TomoCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.len())
}

/// Pixel, height (m) and intensity of point `index`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tomo_cloud_point(
    cloud: *const TomoCloud,
    index: usize,
    azimuth: *mut usize,
    range: *mut usize,
    height: *mut f64,
    intensity: *mut f64,
) -> TomoStatus {
    guard(|| {
        let c = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        let p = c
            .inner
            .points
            .get(index)
            .ok_or_else(|| invalid(format!("point {index} out of {}", c.inner.len())))?;
        if azimuth.is_null() || range.is_null() || height.is_null() || intensity.is_null() {
            return Err(null("output"));
        }
        *azimuth = p.azimuth;
        *range = p.range;
        *height = p.height;
        *intensity = p.intensity;
        Ok(())
    })
}

/// Releases a cloud; null is ignored.
///
/// # Safety
/// `cloud` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tomo_cloud_free(cloud: *mut TomoCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Single-tone frequency CRLB (cycles squared) for `n` elements.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tomo_crlb_single_tone(n: usize, snr_db: f64, out: *mut f64) -> TomoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = crlb_single_tone(n, snr_db).map_err(fail)?;
        Ok(())
    })
}
