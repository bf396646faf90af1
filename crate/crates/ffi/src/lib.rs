//! C ABI over the rainval toolkit.
//!
//! Conventions: every fallible call returns an [`RvStatus`] and writes its
//! result through out-pointers; fitted models are opaque handles freed with
//! [`rv_model_free`]; strings returned by [`rv_last_error_message`] are
//! freed with [`rv_string_free`]. Detail text for the most recent failure
//! on the calling thread is available via [`rv_last_error_message`].

use rainval::config::RunConfig;
use rainval::metrics::{
    classify_intensity, rain_day_contingency_values, ContingencyTable, ContinuousScores,
    IntensityCategory,
};
use rainval::pairing::YearConvention;
use rainval::report::{emit_outputs, run_pipeline, PipelineError};
use rainval::seasonal::{fit_occurrence, BinaryOccurrenceSeries, HarmonicModel};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<Vec<u8>>) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateInput = 3,
    ConfigError = 4,
    IoError = 5,
    InternalError = 6,
}

/// Rainfall intensity class; boundaries belong to the upper class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RvIntensityCategory {
    Dry = 0,
    Light = 1,
    Moderate = 2,
    Heavy = 3,
    Violent = 4,
}

impl From<IntensityCategory> for RvIntensityCategory {
    fn from(c: IntensityCategory) -> Self {
        match c {
            IntensityCategory::Dry => RvIntensityCategory::Dry,
            IntensityCategory::Light => RvIntensityCategory::Light,
            IntensityCategory::Moderate => RvIntensityCategory::Moderate,
            IntensityCategory::Heavy => RvIntensityCategory::Heavy,
            IntensityCategory::Violent => RvIntensityCategory::Violent,
        }
    }
}

/// Continuous scores; each value is meaningful only when its `has_` flag is
/// set (an unset flag means the metric was undefined for the input).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvContinuousScores {
    pub n: usize,
    pub me: f64,
    pub has_me: bool,
    pub pbias: f64,
    pub has_pbias: bool,
    pub r: f64,
    pub has_r: bool,
    pub rsd: f64,
    pub has_rsd: bool,
}

/// Rain-day detection counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RvContingency {
    pub hits: u64,
    pub misses: u64,
    pub false_alarms: u64,
    pub correct_negatives: u64,
}

/// Shape and fit diagnostics of an occurrence model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvModelInfo {
    pub harmonics: usize,
    pub n_obs: usize,
    pub converged: bool,
    pub deviance: f64,
}

/// Opaque fitted occurrence model.
pub struct RvHarmonicModel {
    inner: HarmonicModel,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn rv_status_message(status: RvStatus) -> *const c_char {
    let text: &'static str = match status {
        RvStatus::Ok => "ok\0",
        RvStatus::NullPointer => "null pointer argument\0",
        RvStatus::InvalidArgument => "invalid argument\0",
        RvStatus::DegenerateInput => "degenerate input\0",
        RvStatus::ConfigError => "configuration error\0",
        RvStatus::IoError => "input/output error\0",
        RvStatus::InternalError => "internal error\0",
    };
    text.as_ptr() as *const c_char
}

/// Detail text of the most recent failure on this thread, or NULL.
/// The caller owns the returned string and frees it with [`rv_string_free`].
#[no_mangle]
pub extern "C" fn rv_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.clone().into_raw())
            .unwrap_or(std::ptr::null_mut())
    })
}

/// Frees a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must have been returned by [`rv_last_error_message`] and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn guarded<T>(f: impl FnOnce() -> Result<T, RvStatus>) -> Result<T, RvStatus> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(result) => result,
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in library call".to_string());
            set_last_error(detail);
            Err(RvStatus::InternalError)
        }
    }
}

unsafe fn slice_arg<'a, T>(ptr: *const T, n: usize) -> Result<&'a [T], RvStatus> {
    if ptr.is_null() {
        set_last_error("null input array");
        return Err(RvStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(ptr, n))
}

fn finish<T>(out: *mut T, result: Result<T, RvStatus>) -> RvStatus {
    match result {
        Ok(value) => {
            if out.is_null() {
                set_last_error("null output pointer");
                return RvStatus::NullPointer;
            }
            unsafe { out.write(value) };
            RvStatus::Ok
        }
        Err(status) => status,
    }
}

/// Computes mean error, percent bias, correlation, and the standard
/// deviation ratio of `product` against `gauge` over `n` pairs.
///
/// # Safety
/// `product` and `gauge` must point to `n` readable doubles; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_continuous_scores(
    product: *const f64,
    gauge: *const f64,
    n: usize,
    out: *mut RvContinuousScores,
) -> RvStatus {
    let result = guarded(|| {
        let product = slice_arg(product, n)?;
        let gauge = slice_arg(gauge, n)?;
        let scores = ContinuousScores::compute(product, gauge);
        let unpack = |m: rainval::metrics::MetricResult| m.map_or((0.0, false), |v| (v, true));
        let (me, has_me) = unpack(scores.me);
        let (pbias, has_pbias) = unpack(scores.pbias);
        let (r, has_r) = unpack(scores.r);
        let (rsd, has_rsd) = unpack(scores.rsd);
        Ok(RvContinuousScores {
            n: scores.n,
            me,
            has_me,
            pbias,
            has_pbias,
            r,
            has_r,
            rsd,
            has_rsd,
        })
    });
    finish(out, result)
}

/// Classifies a daily depth in millimetres.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_classify_intensity(
    mm: f64,
    out: *mut RvIntensityCategory,
) -> RvStatus {
    let result = guarded(|| {
        if !mm.is_finite() || mm < 0.0 {
            set_last_error(format!("depth must be finite and non-negative, got {mm}"));
            return Err(RvStatus::InvalidArgument);
        }
        Ok(classify_intensity(mm).into())
    });
    finish(out, result)
}

/// Counts rain-day hits, misses, false alarms, and correct negatives at a
/// threshold.
///
/// # Safety
/// `gauge` and `product` must point to `n` readable doubles; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_rain_day_contingency(
    gauge: *const f64,
    product: *const f64,
    n: usize,
    threshold: f64,
    out: *mut RvContingency,
) -> RvStatus {
    let result = guarded(|| {
        if threshold <= 0.0 || threshold.is_nan() {
            set_last_error("threshold must be positive");
            return Err(RvStatus::InvalidArgument);
        }
        let gauge = slice_arg(gauge, n)?;
        let product = slice_arg(product, n)?;
        let t = rain_day_contingency_values(gauge, product, threshold);
        Ok(RvContingency {
            hits: t.hits,
            misses: t.misses,
            false_alarms: t.false_alarms,
            correct_negatives: t.correct_negatives,
        })
    });
    finish(out, result)
}

/// Probability of detection from a contingency table. Fails with
/// `DegenerateInput` when no events were observed.
///
/// # Safety
/// `table` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rv_contingency_pod(
    table: *const RvContingency,
    out: *mut f64,
) -> RvStatus {
    let result = guarded(|| {
        if table.is_null() {
            set_last_error("null table pointer");
            return Err(RvStatus::NullPointer);
        }
        let t = &*table;
        let core = ContingencyTable {
            hits: t.hits,
            misses: t.misses,
            false_alarms: t.false_alarms,
            correct_negatives: t.correct_negatives,
        };
        core.pod().map_err(|reason| {
            set_last_error(reason.code());
            RvStatus::DegenerateInput
        })
    });
    finish(out, result)
}

/// Fits an occurrence model to `n` (day-of-year, wet) observations with the
/// given harmonic count. Day indices are 1..=365; outcomes are 0 or 1.
/// On success writes an owned handle that must be freed with
/// [`rv_model_free`].
///
/// # Safety
/// `day_index` and `outcome` must point to `n` readable elements; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_fit_occurrence(
    day_index: *const u32,
    outcome: *const u8,
    n: usize,
    harmonics: usize,
    out: *mut *mut RvHarmonicModel,
) -> RvStatus {
    let result = guarded(|| {
        let day_index = slice_arg(day_index, n)?;
        let outcome = slice_arg(outcome, n)?;
        if day_index.iter().any(|t| !(1..=365).contains(t)) {
            set_last_error("day indices must be in 1..=365");
            return Err(RvStatus::InvalidArgument);
        }
        if outcome.iter().any(|y| *y > 1) {
            set_last_error("outcomes must be 0 or 1");
            return Err(RvStatus::InvalidArgument);
        }
        let series = BinaryOccurrenceSeries {
            day_index: day_index.to_vec(),
            outcome: outcome.iter().map(|y| *y == 1).collect(),
            threshold: 0.85,
            year_convention: YearConvention::CALENDAR,
        };
        let model = fit_occurrence(&series, harmonics).map_err(|e| {
            set_last_error(e.to_string());
            match e {
                rainval::seasonal::SeasonalError::DegenerateOccurrence => {
                    RvStatus::DegenerateInput
                }
                rainval::seasonal::SeasonalError::InsufficientData { .. } => {
                    RvStatus::InvalidArgument
                }
                rainval::seasonal::SeasonalError::Solver(_) => RvStatus::InternalError,
            }
        })?;
        Ok(Box::into_raw(Box::new(RvHarmonicModel { inner: model })))
    });
    finish(out, result)
}

/// Rain-day probability at day-of-year `t` (periodic beyond 365).
///
/// # Safety
/// `model` must be a live handle from [`rv_fit_occurrence`]; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_model_predict(
    model: *const RvHarmonicModel,
    t: f64,
    out: *mut f64,
) -> RvStatus {
    let result = guarded(|| {
        if model.is_null() {
            set_last_error("null model handle");
            return Err(RvStatus::NullPointer);
        }
        Ok((*model).inner.predict(t))
    });
    finish(out, result)
}

/// Shape and diagnostics of a fitted model.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_model_info(
    model: *const RvHarmonicModel,
    out: *mut RvModelInfo,
) -> RvStatus {
    let result = guarded(|| {
        if model.is_null() {
            set_last_error("null model handle");
            return Err(RvStatus::NullPointer);
        }
        let m = &(*model).inner;
        Ok(RvModelInfo {
            harmonics: m.k,
            n_obs: m.n_obs,
            converged: m.converged,
            deviance: m.deviance,
        })
    });
    finish(out, result)
}

/// Copies `[beta0, A1, B1, ..., Ak, Bk]` into `buf` and writes the count to
/// `written`. Fails with `InvalidArgument` when `buf_len` is too small.
///
/// # Safety
/// `model` must be a live handle; `buf` must point to `buf_len` writable
/// doubles; `written` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rv_model_coefficients(
    model: *const RvHarmonicModel,
    buf: *mut f64,
    buf_len: usize,
    written: *mut usize,
) -> RvStatus {
    let result = guarded(|| {
        if model.is_null() || buf.is_null() {
            set_last_error("null pointer argument");
            return Err(RvStatus::NullPointer);
        }
        let coefficients = (*model).inner.coefficients();
        if buf_len < coefficients.len() {
            set_last_error(format!(
                "coefficient buffer too small: need {}, got {buf_len}",
                coefficients.len()
            ));
            return Err(RvStatus::InvalidArgument);
        }
        std::ptr::copy_nonoverlapping(coefficients.as_ptr(), buf, coefficients.len());
        Ok(coefficients.len())
    });
    finish(written, result)
}

/// Frees a model handle. NULL is a no-op.
///
/// # Safety
/// `model` must have come from [`rv_fit_occurrence`] and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn rv_model_free(model: *mut RvHarmonicModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs the full validation pipeline from a TOML config file, writing all
/// outputs to the config's output directory.
///
/// # Safety
/// `config_path` must be a readable NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rv_run_pipeline(config_path: *const c_char) -> RvStatus {
    let result = guarded(|| {
        if config_path.is_null() {
            set_last_error("null config path");
            return Err(RvStatus::NullPointer);
        }
        let path = match CStr::from_ptr(config_path).to_str() {
            Ok(s) => std::path::PathBuf::from(s),
            Err(_) => {
                set_last_error("config path is not valid UTF-8");
                return Err(RvStatus::InvalidArgument);
            }
        };
        let map_err = |e: PipelineError| {
            set_last_error(e.to_string());
            match e {
                PipelineError::Config(_) => RvStatus::ConfigError,
                PipelineError::Input(_) => RvStatus::IoError,
                PipelineError::Internal(_) => RvStatus::InternalError,
            }
        };
        let config = RunConfig::load(&path).map_err(|e| {
            set_last_error(e.to_string());
            RvStatus::ConfigError
        })?;
        let report = run_pipeline(&config).map_err(map_err)?;
        emit_outputs(&report, &config.out_dir).map_err(map_err)?;
        Ok(())
    });
    match result {
        Ok(()) => RvStatus::Ok,
        Err(status) => status,
    }
}
