//! C ABI over `cfak-core`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free` function. Every fallible call returns a [`CfakStatus`];
//! on failure [`cfak_last_error`] describes the problem. Panics never cross
//! the boundary; they surface as `CFAK_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cfak_core::benchmarks::{self, Benchmark};
use cfak_core::cli::parse_config;
use cfak_core::driver::{self, Method, Surrogate};
use cfak_core::Error;

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfakStatus {
    CFAK_OK = 0,
    /// A required pointer argument was null.
    CFAK_ERR_NULL = 1,
    CFAK_ERR_INVALID_ARGUMENT = 2,
    CFAK_ERR_UNKNOWN_BENCHMARK = 3,
    /// The DoE budget ran out before the stopping rule was met.
    CFAK_ERR_BUDGET_EXHAUSTED = 4,
    CFAK_ERR_RUNTIME = 5,
    CFAK_ERR_PANIC = 6,
}

use CfakStatus::*;

/// A benchmark limit-state function with its input distribution.
pub struct CfakBenchmark(Benchmark);

/// A fitted surrogate and its construction record.
pub struct CfakSurrogate(Surrogate);

/// Outcome of one seed.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfakRunSummary {
    pub pf: f64,
    pub cov: f64,
    pub n_mc: u64,
    pub n_fail: u64,
    /// True-function evaluations.
    pub n_g: u64,
    /// Surrogate predictions during construction.
    pub n_pred: u64,
    pub doe_size: u64,
    pub wall_ms: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> CfakStatus {
    match e {
        Error::UnknownBenchmark { .. } => CFAK_ERR_UNKNOWN_BENCHMARK,
        Error::BudgetExhausted { .. } => CFAK_ERR_BUDGET_EXHAUSTED,
        Error::InvalidArgument(_) | Error::InvalidParameter(_) | Error::Config(_) | Error::Json(_) => {
            CFAK_ERR_INVALID_ARGUMENT
        }
        _ => CFAK_ERR_RUNTIME,
    }
}

struct Fail(CfakStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CfakStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CFAK_OK
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CFAK_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CFAK_ERR_NULL, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CFAK_ERR_INVALID_ARGUMENT, format!("`{what}` is not UTF-8")))
}

unsafe fn optional_json(p: *const c_char, what: &str) -> Result<serde_json::Value, Fail> {
    if p.is_null() {
        return Ok(serde_json::json!({}));
    }
    serde_json::from_str(text(p, what)?)
        .map_err(|e| Fail(CFAK_ERR_INVALID_ARGUMENT, format!("`{what}` is not valid JSON: {e}")))
}

unsafe fn benchmark<'a>(b: *const CfakBenchmark) -> Result<&'a Benchmark, Fail> {
    b.as_ref().map(|b| &b.0).ok_or_else(|| null("benchmark"))
}

/// Method settings for `bench`: benchmark defaults with the JSON overrides merged in.
unsafe fn method_config(
    bench: &Benchmark,
    method: *const c_char,
    overrides: *const c_char,
) -> Result<driver::MethodConfig, Fail> {
    let method: Method = text(method, "method")?.parse()?;
    let doc = serde_json::json!({
        "benchmark": bench.id(),
        "params": bench.params(),
        "method": method,
        "overrides": optional_json(overrides, "overrides")?,
    });
    let config = parse_config(&doc.to_string())?;
    Ok(config.method_config(bench)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cfak_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next cfak call on the same thread.
#[no_mangle]
pub extern "C" fn cfak_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a benchmark by id. `params_json` may be null or an object such as
/// `{"k": 3.9}`.
///
/// # Safety
/// `id` and `params_json` must be null or NUL-terminated strings; `out` must
/// be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_benchmark_create(
    id: *const c_char,
    params_json: *const c_char,
    out: *mut *mut CfakBenchmark,
) -> CfakStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let id = text(id, "id")?;
        let params = serde_json::from_value(optional_json(params_json, "params_json")?)
            .map_err(|e| Fail(CFAK_ERR_INVALID_ARGUMENT, format!("params: {e}")))?;
        let bench = benchmarks::make(id, &params)?;
        *out = Box::into_raw(Box::new(CfakBenchmark(bench)));
        Ok(())
    })
}

/// # Safety
/// `bench` must come from [`cfak_benchmark_create`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cfak_benchmark_free(bench: *mut CfakBenchmark) {
    if !bench.is_null() {
        drop(Box::from_raw(bench));
    }
}

/// # Safety
/// `bench` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_benchmark_dim(bench: *const CfakBenchmark, out: *mut usize) -> CfakStatus {
    guard(|| {
        let b = benchmark(bench)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = b.dim();
        Ok(())
    })
}

/// Evaluates the limit-state function at a standard-normal point of length `len`.
///
/// # Safety
/// `u` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_benchmark_eval_u(
    bench: *const CfakBenchmark,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> CfakStatus {
    guard(|| {
        let b = benchmark(bench)?;
        if u.is_null() {
            return Err(null("u"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = b.eval_u(std::slice::from_raw_parts(u, len))?;
        Ok(())
    })
}

/// Runs one seed of `method` (`"cfak_c"`, `"akmcs_u"`, `"mcs"`, ...).
/// `overrides_json` may be null or an object of method settings.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_run(
    bench: *const CfakBenchmark,
    method: *const c_char,
    overrides_json: *const c_char,
    seed: u64,
    out: *mut CfakRunSummary,
) -> CfakStatus {
    guard(|| {
        let b = benchmark(bench)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let cfg = method_config(b, method, overrides_json)?;
        let r = driver::run_single(b, &cfg, seed)?;
        *out = CfakRunSummary {
            pf: r.estimate.pf,
            cov: r.estimate.cov,
            n_mc: r.estimate.n_mc as u64,
            n_fail: r.estimate.n_fail as u64,
            n_g: r.n_g as u64,
            n_pred: r.n_pred,
            doe_size: r.doe_size as u64,
            wall_ms: r.wall_ms,
        };
        Ok(())
    })
}

/// Builds a surrogate with one of the cfak variants, without any Monte Carlo stage.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_surrogate_build(
    bench: *const CfakBenchmark,
    method: *const c_char,
    overrides_json: *const c_char,
    seed: u64,
    out: *mut *mut CfakSurrogate,
) -> CfakStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let b = benchmark(bench)?;
        let cfg = method_config(b, method, overrides_json)?;
        let s = driver::build_surrogate(|u: &[f64]| b.eval_u(u), b.dim(), &cfg, seed)?;
        *out = Box::into_raw(Box::new(CfakSurrogate(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`cfak_surrogate_build`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cfak_surrogate_free(s: *mut CfakSurrogate) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Predictive mean and variance at `u`.
///
/// # Safety
/// `u` must point to `len` doubles; `mean` and `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_surrogate_predict(
    s: *const CfakSurrogate,
    u: *const f64,
    len: usize,
    mean: *mut f64,
    variance: *mut f64,
) -> CfakStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surrogate"))?;
        if u.is_null() {
            return Err(null("u"));
        }
        let (mean, variance) = match (mean.as_mut(), variance.as_mut()) {
            (Some(m), Some(v)) => (m, v),
            _ => return Err(null("mean/variance")),
        };
        if len != s.0.model.dim() {
            return Err(Fail(
                CFAK_ERR_INVALID_ARGUMENT,
                format!("point has {len} coordinates, surrogate expects {}", s.0.model.dim()),
            ));
        }
        let p = s.0.model.predict(std::slice::from_raw_parts(u, len));
        *mean = p.mean;
        *variance = p.variance;
        Ok(())
    })
}

/// Number of training points, initial design included.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cfak_surrogate_doe_size(s: *const CfakSurrogate, out: *mut usize) -> CfakStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surrogate"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.0.model.training().len();
        Ok(())
    })
}
