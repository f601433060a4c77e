//! C ABI over the `arrayemu` toolkit.
//!
//! Every function returns an [`AeStatus`]; on failure a message is kept per
//! thread and can be read with [`ae_last_error`]. Models and MUSIC
//! estimators are opaque handles released with their `_free` function.
//! Complex arrays are passed as interleaved `re, im` doubles, row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use arrayemu::array::{virtual_steering, ArrayConfig, SnapshotBlock};
use arrayemu::doa::{sample_covariance, AngleGrid, MusicEstimator};
use arrayemu::nn::{predict, Mlp};
use arrayemu::{Error, C64};
use ndarray::Array2;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Dimension = 3,
    Io = 4,
    Format = 5,
    MissingFile = 6,
    Training = 7,
    Config = 8,
    Panic = 9,
}

/// Uniform linear MIMO array description.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AeArray {
    pub tx_count: usize,
    pub rx_count: usize,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
}

/// Trained emulator handle.
pub struct AeModel {
    model: Mlp,
}

/// MUSIC estimator handle with its cached grid steering vectors.
pub struct AeMusic {
    music: MusicEstimator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AeStatus {
    match e {
        Error::Domain(_) => AeStatus::Domain,
        Error::Dimension(_) => AeStatus::Dimension,
        Error::Training(_) => AeStatus::Training,
        Error::Format { .. } => AeStatus::Format,
        Error::MissingFile(_) | Error::MissingModel { .. } => AeStatus::MissingFile,
        Error::Config(_) => AeStatus::Config,
        Error::Io { .. } | Error::Csv(_) => AeStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            AeStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            AeStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AeStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> Result<*const T, Fail> {
    if p.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(p)
    }
}

fn array_config(a: &AeArray) -> Result<ArrayConfig, Error> {
    ArrayConfig::with_spacing(a.tx_count, a.rx_count, a.spacing_wavelengths)
}

/// # Safety
/// `data` must hold `2 * rows * cols` doubles.
unsafe fn read_complex(data: *const f64, rows: usize, cols: usize) -> Result<Array2<C64>, Fail> {
    let n = rows
        .checked_mul(cols)
        .ok_or(Fail::Lib(Error::Dimension("size overflow".into())))?;
    let raw = std::slice::from_raw_parts(non_null(data, "data")?, 2 * n);
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        let k = 2 * (i * cols + j);
        C64::new(raw[k], raw[k + 1])
    }))
}

/// # Safety
/// `out` must have room for `out_len` doubles.
unsafe fn write_complex<'a>(
    out: *mut f64,
    out_len: usize,
    values: impl ExactSizeIterator<Item = &'a C64>,
) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    if out_len < 2 * values.len() {
        return Err(Fail::Lib(Error::Dimension(format!(
            "output buffer holds {out_len} doubles, {} needed",
            2 * values.len()
        ))));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (k, z) in values.enumerate() {
        dst[2 * k] = z.re;
        dst[2 * k + 1] = z.im;
    }
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ae_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Virtual steering vector (length `tx_count * rx_count`, TX-major) into `out`.
///
/// # Safety
/// `out` must have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ae_virtual_steering(
    array: AeArray,
    theta_rad: f64,
    out: *mut f64,
    out_len: usize,
) -> AeStatus {
    guard(|| {
        let v = virtual_steering(theta_rad, &array_config(&array)?)?;
        write_complex(out, out_len, v.iter())
    })
}

/// Load a model file written by the toolkit.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ae_model_load(path: *const c_char, out: *mut *mut AeModel) -> AeStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let path = CStr::from_ptr(non_null(path, "path")?)
            .to_str()
            .map_err(|_| Error::Config("path is not valid UTF-8".into()))?;
        let model = Mlp::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(AeModel { model }));
        Ok(())
    })
}

/// Stacked input and output widths of a model (`2L`, `2H`).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_model_dims(
    model: *const AeModel,
    input_dim: *mut usize,
    output_dim: *mut usize,
) -> AeStatus {
    guard(|| {
        let m = &*non_null(model, "model")?;
        non_null(input_dim, "input_dim")?;
        non_null(output_dim, "output_dim")?;
        *input_dim = m.model.input_dim();
        *output_dim = m.model.output_dim();
        Ok(())
    })
}

/// Emulate high-array snapshots from low-array ones.
///
/// `low_data` holds `L x pulses` complex values; `out` receives
/// `H x pulses` complex values.
///
/// # Safety
/// Pointers must be valid for the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn ae_model_predict(
    model: *const AeModel,
    low: AeArray,
    high: AeArray,
    low_data: *const f64,
    pulses: usize,
    out: *mut f64,
    out_len: usize,
) -> AeStatus {
    guard(|| {
        let m = &*non_null(model, "model")?;
        let (low, high) = (array_config(&low)?, array_config(&high)?);
        let data = read_complex(low_data, low.virtual_size(), pulses)?;
        let pred = predict(&m.model, &SnapshotBlock::new(data, f64::NAN, low)?, &high)?;
        write_complex(out, out_len, pred.data.iter())
    })
}

/// Release a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`ae_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ae_model_free(model: *mut AeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Build a MUSIC estimator for `targets` sources on the grid
/// `lo_deg..=hi_deg` with step `step_deg`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ae_music_new(
    array: AeArray,
    lo_deg: f64,
    hi_deg: f64,
    step_deg: f64,
    targets: usize,
    out: *mut *mut AeMusic,
) -> AeStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let music = MusicEstimator::new(
            array_config(&array)?,
            AngleGrid::new(lo_deg, hi_deg, step_deg)?,
            targets,
        )?;
        *out = Box::into_raw(Box::new(AeMusic { music }));
        Ok(())
    })
}

/// Estimate angles (degrees, ascending) from `virtual_size x pulses`
/// complex snapshots. `angles_out` receives `targets` values;
/// `degenerate` (optional) is set to 1 when fewer peaks than targets were found.
///
/// # Safety
/// Pointers must be valid for the stated sizes; `degenerate` may be null.
#[no_mangle]
pub unsafe extern "C" fn ae_music_estimate(
    music: *const AeMusic,
    data: *const f64,
    pulses: usize,
    angles_out: *mut f64,
    angles_len: usize,
    degenerate: *mut i32,
) -> AeStatus {
    guard(|| {
        let m = &(*non_null(music, "music")?).music;
        let x = read_complex(data, m.array().virtual_size(), pulses)?;
        let cov = sample_covariance(x.view(), 0..pulses)?;
        let pick = m.estimate(&cov)?;
        non_null(angles_out, "angles_out")?;
        if angles_len < pick.angles_deg.len() {
            return Err(Fail::Lib(Error::Dimension(format!(
                "angle buffer holds {angles_len}, {} needed",
                pick.angles_deg.len()
            ))));
        }
        std::slice::from_raw_parts_mut(angles_out, pick.angles_deg.len()).copy_from_slice(&pick.angles_deg);
        if !degenerate.is_null() {
            *degenerate = i32::from(pick.degenerate);
        }
        Ok(())
    })
}

/// Release a MUSIC handle. Null is ignored.
///
/// # Safety
/// `music` must come from [`ae_music_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ae_music_free(music: *mut AeMusic) {
    if !music.is_null() {
        drop(Box::from_raw(music));
    }
}

/// Deterministic CRB on the angles. `signals` is `k x snapshots` complex;
/// `diag_out` (length `k`) receives the per-target bounds in rad².
///
/// # Safety
/// Pointers must be valid for the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn ae_crb(
    array: AeArray,
    angles_rad: *const f64,
    k: usize,
    signals: *const f64,
    snapshots: usize,
    noise_var: f64,
    diag_out: *mut f64,
) -> AeStatus {
    guard(|| {
        let angles = std::slice::from_raw_parts(non_null(angles_rad, "angles_rad")?, k);
        let x = read_complex(signals, k, snapshots)?;
        let bound = arrayemu::metrics::crb(angles, &x, noise_var, &array_config(&array)?)?;
        non_null(diag_out, "diag_out")?;
        std::slice::from_raw_parts_mut(diag_out, k).copy_from_slice(&bound.diagonal_rad2);
        Ok(())
    })
}
