//! C ABI over the genreforge library.
//!
//! Every fallible function returns a [`GfStatus`]; on failure the message is
//! kept per thread and read with [`gf_last_error_message`]. Models are opaque
//! handles created by a `*_load` function and released by the matching
//! `*_free`. Strings are copied into caller buffers: the required size
//! (including the terminating NUL) is always written to `*required`, and
//! `GF_STATUS_BUFFER_TOO_SMALL` is returned when `buf_len` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use genreforge::audio::{load_wav, AudioClip, FramingConfig};
use genreforge::autoencoder::TrainedAutoencoder;
use genreforge::pipeline::ScalingParams;
use genreforge::schema::{FeatureSchema, CONTENT_DIM};
use genreforge::svm::SvmModel;
use genreforge::temporal::build_feature_vector;
use genreforge::{Error, ErrorKind};

/// Result code of every fallible call. The first four match the CLI exit
/// codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    Io = 1,
    Config = 2,
    Internal = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Trained autoencoder.
pub struct GfAutoencoder {
    inner: TrainedAutoencoder,
}

/// Trained one-vs-one SVM.
pub struct GfSvm {
    inner: SvmModel,
}

/// Min-max scaling fitted on training vectors.
pub struct GfScaler {
    inner: ScalingParams,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(GfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Io => GfStatus::Io,
            ErrorKind::Config => GfStatus::Config,
            ErrorKind::Internal => GfStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: GfStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, recording any error or panic for [`gf_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            GfStatus::Panic
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return fail(GfStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return fail(GfStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn path(ptr: *const c_char) -> Result<PathBuf, Failure> {
    if ptr.is_null() {
        return fail(GfStatus::NullPointer, "path is null");
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => fail(GfStatus::InvalidUtf8, "path is not valid UTF-8"),
    }
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .map_or_else(|| fail(GfStatus::NullPointer, format!("{what} handle is null")), Ok)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(GfStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_string(s: &str, buf: *mut c_char, buf_len: usize, required: *mut usize) -> Result<(), Failure> {
    let needed = s.len() + 1;
    if !required.is_null() {
        required.write(needed);
    }
    if buf_len < needed {
        return fail(
            GfStatus::BufferTooSmall,
            format!("{needed} bytes needed, {buf_len} given"),
        );
    }
    if buf.is_null() {
        return fail(GfStatus::NullPointer, "string buffer is null");
    }
    std::ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    buf.add(s.len()).write(0);
    Ok(())
}

fn check_len(expected: usize, got: usize, what: &str) -> Result<(), Failure> {
    if expected == got {
        Ok(())
    } else {
        fail(
            GfStatus::Config,
            format!("{what} has length {got}, expected {expected}"),
        )
    }
}

fn copy_into(values: &[f64], out: &mut [f64]) -> Result<(), Failure> {
    check_len(values.len(), out.len(), "output buffer")?;
    out.copy_from_slice(values);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's most recent error message. An empty string
/// means no error has been recorded.
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes; `required` may be null.
#[no_mangle]
pub unsafe extern "C" fn gf_last_error_message(buf: *mut c_char, buf_len: usize, required: *mut usize) -> GfStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_string(&msg, buf, buf_len, required) {
        Ok(()) => GfStatus::Ok,
        Err(Failure(status, _)) => status,
    }
}

/// Length of the content feature vector (224).
#[no_mangle]
pub extern "C" fn gf_feature_count() -> usize {
    CONTENT_DIM
}

/// Name of content component `index`, e.g. `mfcc.M.0`.
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes; `required` may be null.
#[no_mangle]
pub unsafe extern "C" fn gf_feature_name(
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
    required: *mut usize,
) -> GfStatus {
    guard(|| {
        let names = FeatureSchema::content().names();
        let Some(name) = names.get(index) else {
            return fail(GfStatus::Config, format!("component index {index} out of range"));
        };
        copy_string(name, buf, buf_len, required)
    })
}

fn extract(clip: AudioClip, out: &mut [f64]) -> Result<(), Failure> {
    check_len(CONTENT_DIM, out.len(), "output buffer")?;
    let v = build_feature_vector(&clip.canonicalize(), &FramingConfig::standard())?;
    copy_into(&v.values, out)
}

/// Extracts the 224 content features from mono samples in `[-1, 1]`.
/// Clips at other rates are resampled to 22050 Hz first.
///
/// # Safety
/// `samples` must point to `n_samples` doubles and `out` to `out_len`
/// writable doubles; `out_len` must equal [`gf_feature_count`].
#[no_mangle]
pub unsafe extern "C" fn gf_extract_features(
    samples: *const f64,
    n_samples: usize,
    sample_rate: u32,
    out: *mut f64,
    out_len: usize,
) -> GfStatus {
    guard(|| {
        let samples = slice(samples, n_samples, "samples")?;
        let out = slice_mut(out, out_len, "out")?;
        extract(AudioClip::new(samples.to_vec(), sample_rate, "ffi")?, out)
    })
}

/// Extracts the 224 content features from a PCM WAV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must point to `out_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_extract_features_wav(path_ptr: *const c_char, out: *mut f64, out_len: usize) -> GfStatus {
    guard(|| {
        let p = path(path_ptr)?;
        let out = slice_mut(out, out_len, "out")?;
        extract(load_wav(&p)?, out)
    })
}

/// Loads scaling parameters written by the CLI (`scaling*.json`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_scaler_load(path_ptr: *const c_char, out: *mut *mut GfScaler) -> GfStatus {
    guard(|| {
        let p = path(path_ptr)?;
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let inner: ScalingParams =
            serde_json::from_str(&text).map_err(|e| Failure(GfStatus::Config, format!("{}: {e}", p.display())))?;
        if inner.min.len() != inner.max.len() {
            return fail(GfStatus::Config, "min and max differ in length");
        }
        write_out(out, Box::into_raw(Box::new(GfScaler { inner })))
    })
}

/// Number of components the scaler expects.
///
/// # Safety
/// `scaler` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_scaler_dim(scaler: *const GfScaler) -> usize {
    scaler.as_ref().map_or(0, |s| s.inner.dim())
}

/// Scales `x` into `out` (both of length [`gf_scaler_dim`]).
///
/// # Safety
/// `scaler` must be a live handle; `x` and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_scaler_apply(
    scaler: *const GfScaler,
    x: *const f64,
    out: *mut f64,
    len: usize,
) -> GfStatus {
    guard(|| {
        let s = handle(scaler, "scaler")?;
        let scaled = s.inner.apply(slice(x, len, "x")?)?;
        copy_into(&scaled, slice_mut(out, len, "out")?)
    })
}

/// # Safety
/// `scaler` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_scaler_free(scaler: *mut GfScaler) {
    if !scaler.is_null() {
        drop(Box::from_raw(scaler));
    }
}

/// Loads an autoencoder written by the CLI (`autoencoder.json`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_autoencoder_load(path_ptr: *const c_char, out: *mut *mut GfAutoencoder) -> GfStatus {
    guard(|| {
        let inner = TrainedAutoencoder::load(path(path_ptr)?)?;
        write_out(out, Box::into_raw(Box::new(GfAutoencoder { inner })))
    })
}

/// # Safety
/// `ae` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_autoencoder_input_dim(ae: *const GfAutoencoder) -> usize {
    ae.as_ref().map_or(0, |a| a.inner.model.input_dim())
}

/// # Safety
/// `ae` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_autoencoder_code_dim(ae: *const GfAutoencoder) -> usize {
    ae.as_ref().map_or(0, |a| a.inner.model.code_dim())
}

/// Bottleneck code of a scaled input vector.
///
/// # Safety
/// `ae` must be a live handle; `x` must point to `x_len` doubles and `out`
/// to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_autoencoder_encode(
    ae: *const GfAutoencoder,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> GfStatus {
    guard(|| {
        let a = handle(ae, "autoencoder")?;
        let code = a.inner.encode(slice(x, x_len, "x")?)?;
        copy_into(&code, slice_mut(out, out_len, "out")?)
    })
}

/// # Safety
/// `ae` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_autoencoder_free(ae: *mut GfAutoencoder) {
    if !ae.is_null() {
        drop(Box::from_raw(ae));
    }
}

/// Loads an SVM written by the CLI (`svm*.json`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_svm_load(path_ptr: *const c_char, out: *mut *mut GfSvm) -> GfStatus {
    guard(|| {
        let inner = SvmModel::load(path(path_ptr)?)?;
        write_out(out, Box::into_raw(Box::new(GfSvm { inner })))
    })
}

/// Input dimension the SVM was trained on.
///
/// # Safety
/// `svm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_svm_dim(svm: *const GfSvm) -> usize {
    svm.as_ref().map_or(0, |s| s.inner.dim)
}

/// # Safety
/// `svm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_svm_class_count(svm: *const GfSvm) -> usize {
    svm.as_ref().map_or(0, |s| s.inner.classes.len())
}

/// Predicted class index of a scaled vector.
///
/// # Safety
/// `svm` must be a live handle, `x` must point to `x_len` doubles and
/// `class_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_svm_predict(
    svm: *const GfSvm,
    x: *const f64,
    x_len: usize,
    class_out: *mut usize,
) -> GfStatus {
    guard(|| {
        let s = handle(svm, "svm")?;
        let class = s.inner.predict(slice(x, x_len, "x")?)?;
        write_out(class_out, class)
    })
}

/// Name of class `index`.
///
/// # Safety
/// `svm` must be a live handle; `buf` must point to `buf_len` writable
/// bytes; `required` may be null.
#[no_mangle]
pub unsafe extern "C" fn gf_svm_class_name(
    svm: *const GfSvm,
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
    required: *mut usize,
) -> GfStatus {
    guard(|| {
        let s = handle(svm, "svm")?;
        let Some(name) = s.inner.classes.get(index) else {
            return fail(GfStatus::Config, format!("class index {index} out of range"));
        };
        copy_string(name, buf, buf_len, required)
    })
}

/// # Safety
/// `svm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_svm_free(svm: *mut GfSvm) {
    if !svm.is_null() {
        drop(Box::from_raw(svm));
    }
}
