//! C ABI over `rcbridge`.
//!
//! Every function returns an [`RcbStatus`]; on failure the message is kept
//! per thread and can be read with [`rcb_last_error_message`]. Objects are
//! opaque handles released with their `_free` function. Strings returned
//! through out-parameters are released with [`rcb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rcbridge::beam_model::{BridgeConfig, DesignPoint};
use rcbridge::doe::{lhs_sample, InputDistribution};
use rcbridge::fe_solver::max_steel_stress;
use rcbridge::pipeline::{fit_surrogate, FittedSurrogate, RosterEntry, Surrogate, SurrogateSettings};
use rcbridge::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    Numerical = 4,
    State = 5,
    Io = 6,
    Parse = 7,
    Panic = 8,
}

/// Bridge description. Create with `rcb_config_default` or `rcb_config_from_json`.
pub struct RcbConfig(BridgeConfig);

/// A trained surrogate.
pub struct RcbModel(FittedSurrogate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RcbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Validation { .. } => RcbStatus::Validation,
            Error::Numerical(_) => RcbStatus::Numerical,
            Error::State(_) => RcbStatus::State,
            Error::Io { .. } => RcbStatus::Io,
            Error::Json(_) | Error::Csv(_) => RcbStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RcbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RcbStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RcbStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RcbStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn rows(p: *const f64, n: usize, d: usize, what: &str) -> Result<Vec<Vec<f64>>, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if d == 0 {
        return Err(Error::validation("d", "need at least one input").into());
    }
    let flat = std::slice::from_raw_parts(p, n * d);
    Ok(flat.chunks(d).map(<[f64]>::to_vec).collect())
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn distribution(bounds: *const f64, d: usize) -> Result<InputDistribution, Failure> {
    if d == 0 {
        return Err(Error::validation("d", "need at least one input").into());
    }
    if bounds.is_null() {
        let dist = InputDistribution::default();
        if d != dist.dim() {
            return Err(Error::validation("d", "default bounds are 4-dimensional").into());
        }
        return Ok(dist);
    }
    let b = std::slice::from_raw_parts(bounds, 2 * d);
    let pairs = b.chunks(2).map(|c| [c[0], c[1]]).collect();
    Ok(InputDistribution::from_bounds(pairs)?)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn rcb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rcb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_config_default(out: *mut *mut RcbConfig) -> RcbStatus {
    guard(|| {
        let cfg = Box::into_raw(Box::new(RcbConfig(BridgeConfig::default())));
        write_out(out, cfg, "out")
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_config_from_json(
    json: *const c_char,
    out: *mut *mut RcbConfig,
) -> RcbStatus {
    guard(|| {
        let cfg = BridgeConfig::from_json_str(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(RcbConfig(cfg))), "out")
    })
}

/// # Safety
/// `config` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcb_config_free(config: *mut RcbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// SHA-256 of the configuration; free the string with `rcb_string_free`.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_config_hash(config: *const RcbConfig, out: *mut *mut c_char) -> RcbStatus {
    guard(|| {
        let cfg = ref_arg(config, "config")?;
        let s = CString::new(cfg.0.hash()).expect("hex has no nul");
        write_out(out, s.into_raw(), "out")
    })
}

/// Maximum rebar tensile stress (Pa) for piers at `x1 < x2 < x3` and deck
/// thickness `h`, all in metres.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_max_steel_stress(
    config: *const RcbConfig,
    x1: f64,
    x2: f64,
    x3: f64,
    h: f64,
    out: *mut f64,
) -> RcbStatus {
    guard(|| {
        let cfg = ref_arg(config, "config")?;
        let q = max_steel_stress(&DesignPoint::new(x1, x2, x3, h), &cfg.0)?;
        write_out(out, q, "out")
    })
}

/// Latin Hypercube design of `n` points in `d` dimensions written row-major
/// to `out` (`n * d` values). `bounds` holds `d` `[lower, upper]` pairs; null
/// selects the bridge variables (`d` must then be 4).
///
/// # Safety
/// `bounds` must be null or hold `2 * d` values; `out` must hold `n * d` values.
#[no_mangle]
pub unsafe extern "C" fn rcb_lhs_sample(
    n: usize,
    d: usize,
    bounds: *const f64,
    seed: u64,
    out: *mut f64,
) -> RcbStatus {
    guard(|| {
        let dist = distribution(bounds, d)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lhs_sample(n, &dist, seed)?;
        let dst = std::slice::from_raw_parts_mut(out, n * d);
        for (row, p) in dst.chunks_mut(d).zip(&s.points) {
            row.copy_from_slice(p);
        }
        Ok(())
    })
}

/// Trains a surrogate. `family` is `kriging_p0` .. `kriging_p4`, `pce` or
/// `svr`; `inputs` is row-major `n * d`; `bounds` as in `rcb_lhs_sample`.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_model_train(
    family: *const c_char,
    inputs: *const f64,
    outputs: *const f64,
    n: usize,
    d: usize,
    bounds: *const f64,
    out: *mut *mut RcbModel,
) -> RcbStatus {
    guard(|| {
        let entry: RosterEntry = str_arg(family, "family")?.parse()?;
        let dist = distribution(bounds, d)?;
        let x = rows(inputs, n, d, "inputs")?;
        if outputs.is_null() {
            return Err(null("outputs"));
        }
        let y = std::slice::from_raw_parts(outputs, n);
        let fitted = fit_surrogate(entry, &dist, &x, y, &SurrogateSettings::default(), "ffi")?;
        write_out(out, Box::into_raw(Box::new(RcbModel(fitted))), "out")
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_model_from_json(json: *const c_char, out: *mut *mut RcbModel) -> RcbStatus {
    guard(|| {
        let fitted = FittedSurrogate::from_json(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(RcbModel(fitted))), "out")
    })
}

/// JSON form of a model; free the string with `rcb_string_free`.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcb_model_to_json(model: *const RcbModel, out: *mut *mut c_char) -> RcbStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let s = CString::new(m.0.to_json()?).expect("json has no nul");
        write_out(out, s.into_raw(), "out")
    })
}

/// Mean prediction at `n` row-major points of dimension `d` into `out`.
///
/// # Safety
/// `model` must be a live handle; `points` must hold `n * d` values and `out` `n`.
#[no_mangle]
pub unsafe extern "C" fn rcb_model_predict(
    model: *const RcbModel,
    points: *const f64,
    n: usize,
    d: usize,
    out: *mut f64,
) -> RcbStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let dim = m.0.model.distribution().dim();
        if d != dim {
            return Err(Error::validation("d", format!("model expects {dim} inputs, got {d}")).into());
        }
        let x = rows(points, n, d, "points")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (slot, p) in dst.iter_mut().zip(&x) {
            *slot = m.0.predict_mean(p)?;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcb_model_free(model: *mut RcbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
