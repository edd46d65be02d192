//! C ABI over `dac-core`.
//!
//! Conventions:
//! - every fallible function returns a [`DacStatus`] and writes its result
//!   through an out-pointer;
//! - on failure, [`dac_last_error_message`] describes the error for the
//!   calling thread;
//! - handles are opaque and released with their matching `*_free` function;
//! - strings returned by the library are released with [`dac_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dac_core::interface::{parse_spec, rank, PriorSetDocument, RankRequest};
use dac_core::{evaluate, kl, DacError, DistributionSpec, ExpertPrior, PosteriorSummary, QuadratureConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DacStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid parameters, malformed text or JSON, empty expert sets.
    InvalidArgument = 2,
    /// Argument outside the mathematical domain, e.g. a quantile level not in (0, 1).
    Domain = 3,
    /// The benchmark KL divergence is zero or infinite.
    UndefinedRatio = 4,
    Numerical = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// A distribution: normal, uniform or two-piece skew-normal.
pub struct DacDistribution {
    spec: DistributionSpec,
}

/// A scored and ranked set of expert priors.
pub struct DacReport {
    report: dac_core::DacReport,
    /// Expert ids in the caller's input order.
    order: Vec<String>,
    json: String,
}

/// Result of [`dac_kl`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DacKlResult {
    /// `+inf` when `q` has zero density where `p` has mass.
    pub value: f64,
    pub estimated_error: f64,
    pub truncated_mass: f64,
    pub infinite: bool,
    pub floored: bool,
    /// The quadrature exhausted its budget or hit numerical slack.
    pub has_warning: bool,
}

/// One expert's score, see [`dac_report_entry`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DacReportEntry {
    pub kl_value: f64,
    pub dac_value: f64,
    pub conflict: bool,
    /// 1 is the best agreement with the data.
    pub rank: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: DacStatus, msg: impl Into<String>) -> DacStatus {
    set_error(msg);
    status
}

fn from_error(e: DacError) -> DacStatus {
    let status = match e {
        DacError::Validation(_) => DacStatus::InvalidArgument,
        DacError::Domain(_) => DacStatus::Domain,
        DacError::UndefinedRatio(_) => DacStatus::UndefinedRatio,
        DacError::Numerical(_) => DacStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> DacStatus) -> DacStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(DacStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, DacStatus> {
    if s.is_null() {
        return Err(fail(DacStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(DacStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

fn emit_distribution(spec: dac_core::Result<DistributionSpec>, out: *mut *mut DacDistribution) -> DacStatus {
    if out.is_null() {
        return fail(DacStatus::NullPointer, "out is null");
    }
    match spec {
        Ok(spec) => {
            unsafe { *out = Box::into_raw(Box::new(DacDistribution { spec })) };
            DacStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn dac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn dac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Normal distribution with standard deviation `sd`.
#[no_mangle]
pub extern "C" fn dac_distribution_normal(mean: f64, sd: f64, out: *mut *mut DacDistribution) -> DacStatus {
    guard(|| emit_distribution(DistributionSpec::normal(mean, sd), out))
}

#[no_mangle]
pub extern "C" fn dac_distribution_uniform(lower: f64, upper: f64, out: *mut *mut DacDistribution) -> DacStatus {
    guard(|| emit_distribution(DistributionSpec::uniform(lower, upper), out))
}

/// Two-piece skew-normal; `location` and `scale` belong to the base normal
/// before skewing.
#[no_mangle]
pub extern "C" fn dac_distribution_skew_normal(
    location: f64,
    scale: f64,
    shape: f64,
    out: *mut *mut DacDistribution,
) -> DacStatus {
    guard(|| emit_distribution(DistributionSpec::skew_normal(location, scale, shape), out))
}

/// Two-piece skew-normal with the given mean and standard deviation.
#[no_mangle]
pub extern "C" fn dac_distribution_skew_normal_mean_sd(
    mean: f64,
    sd: f64,
    shape: f64,
    out: *mut *mut DacDistribution,
) -> DacStatus {
    guard(|| emit_distribution(DistributionSpec::skew_normal_mean_sd(mean, sd, shape), out))
}

/// Parse an inline spec such as `"uniform:0,5"` or `"skew_normal:2.15,0.09,0.78"`.
///
/// # Safety
/// `text` must be null or a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_parse(text: *const c_char, out: *mut *mut DacDistribution) -> DacStatus {
    guard(|| match read_str(text, "text") {
        Ok(t) => emit_distribution(parse_spec(t), out),
        Err(s) => s,
    })
}

/// # Safety
/// `dist` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_free(dist: *mut DacDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

unsafe fn eval_at(
    dist: *const DacDistribution,
    out: *mut f64,
    f: impl FnOnce(&DistributionSpec) -> dac_core::Result<f64>,
) -> DacStatus {
    guard(|| {
        if dist.is_null() || out.is_null() {
            return fail(DacStatus::NullPointer, "distribution or out is null");
        }
        match f(&(*dist).spec) {
            Ok(v) => {
                *out = v;
                DacStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `dist` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_density(dist: *const DacDistribution, x: f64, out: *mut f64) -> DacStatus {
    eval_at(dist, out, |s| Ok(s.density(x)))
}

/// # Safety
/// `dist` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_log_density(
    dist: *const DacDistribution,
    x: f64,
    out: *mut f64,
) -> DacStatus {
    eval_at(dist, out, |s| Ok(s.log_density(x)))
}

/// # Safety
/// `dist` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_cdf(dist: *const DacDistribution, x: f64, out: *mut f64) -> DacStatus {
    eval_at(dist, out, |s| Ok(s.cdf(x)))
}

/// Inverse cdf; `p` must lie strictly between 0 and 1.
///
/// # Safety
/// `dist` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_quantile(dist: *const DacDistribution, p: f64, out: *mut f64) -> DacStatus {
    eval_at(dist, out, |s| s.quantile(p))
}

/// # Safety
/// `dist` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_mean(dist: *const DacDistribution, out: *mut f64) -> DacStatus {
    eval_at(dist, out, |s| Ok(s.mean()))
}

/// # Safety
/// `dist` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_distribution_sd(dist: *const DacDistribution, out: *mut f64) -> DacStatus {
    eval_at(dist, out, |s| Ok(s.sd()))
}

fn quadrature(relative_tolerance: f64) -> QuadratureConfig {
    if relative_tolerance > 0.0 {
        QuadratureConfig::with_relative_tolerance(relative_tolerance)
    } else {
        QuadratureConfig::default()
    }
}

/// `KL(p || q)`. A `relative_tolerance` of 0 selects the default.
///
/// # Safety
/// `p` and `q` must be live handles; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_kl(
    p: *const DacDistribution,
    q: *const DacDistribution,
    relative_tolerance: f64,
    out: *mut DacKlResult,
) -> DacStatus {
    guard(|| {
        if p.is_null() || q.is_null() || out.is_null() {
            return fail(DacStatus::NullPointer, "p, q or out is null");
        }
        match kl(&(*p).spec, &(*q).spec, &quadrature(relative_tolerance)) {
            Ok(r) => {
                *out = DacKlResult {
                    value: r.value,
                    estimated_error: r.estimated_error,
                    truncated_mass: r.truncated_mass,
                    infinite: r.infinite,
                    floored: r.floored,
                    has_warning: r.warning.is_some(),
                };
                DacStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

fn make_report(report: dac_core::DacReport, order: Vec<String>, json: String) -> *mut DacReport {
    Box::into_raw(Box::new(DacReport { report, order, json }))
}

/// Score `count` expert priors against a normal `posterior` and a `benchmark`
/// prior. `ids` may be null, in which case experts are named `"1"`, `"2"`, ...
///
/// # Safety
/// `experts` must point to `count` live handles; `ids`, when not null, to
/// `count` nul-terminated strings; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_evaluate(
    posterior: *const DacDistribution,
    benchmark: *const DacDistribution,
    experts: *const *const DacDistribution,
    ids: *const *const c_char,
    count: usize,
    relative_tolerance: f64,
    out: *mut *mut DacReport,
) -> DacStatus {
    guard(|| {
        if posterior.is_null() || benchmark.is_null() || out.is_null() || (count > 0 && experts.is_null()) {
            return fail(DacStatus::NullPointer, "posterior, benchmark, experts or out is null");
        }
        let mut priors = Vec::with_capacity(count);
        for i in 0..count {
            let e = *experts.add(i);
            if e.is_null() {
                return fail(DacStatus::NullPointer, format!("experts[{i}] is null"));
            }
            let id = if ids.is_null() {
                (i + 1).to_string()
            } else {
                match read_str(*ids.add(i), &format!("ids[{i}]")) {
                    Ok(s) => s.to_string(),
                    Err(s) => return s,
                }
            };
            priors.push(ExpertPrior::new(id.clone(), id, (*e).spec));
        }
        let post = match PosteriorSummary::supplied((*posterior).spec) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        match evaluate(&post, &(*benchmark).spec, &priors, &quadrature(relative_tolerance)) {
            Ok(report) => {
                let doc = serde_json::to_string_pretty(&report).expect("report serializes");
                *out = make_report(report, priors.into_iter().map(|p| p.id).collect(), doc);
                DacStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Run the full rank pipeline from a JSON request (the body accepted by the
/// HTTP `/api/rank` endpoint). The report handle serializes to the full
/// report document, including input digests.
///
/// # Safety
/// `request_json` must be a nul-terminated string; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_rank_json(request_json: *const c_char, out: *mut *mut DacReport) -> DacStatus {
    guard(|| {
        if out.is_null() {
            return fail(DacStatus::NullPointer, "out is null");
        }
        let text = match read_str(request_json, "request_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let req: RankRequest = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => return fail(DacStatus::InvalidArgument, format!("invalid rank request: {e}")),
        };
        match rank(&req) {
            Ok(doc) => {
                let order = order_of(&doc.experts);
                let json = doc.to_json_pretty();
                *out = make_report(doc.report, order, json);
                DacStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

fn order_of(set: &PriorSetDocument) -> Vec<String> {
    set.experts.iter().map(|e| e.id.clone()).collect()
}

/// Number of experts in the report.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dac_report_len(report: *const DacReport) -> usize {
    if report.is_null() {
        0
    } else {
        (*report).order.len()
    }
}

/// # Safety
/// `report` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_report_benchmark_kl(report: *const DacReport, out: *mut f64) -> DacStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(DacStatus::NullPointer, "report or out is null");
        }
        *out = (*report).report.benchmark_kl;
        DacStatus::Ok
    })
}

/// Score of the expert at `index` in the caller's input order.
///
/// # Safety
/// `report` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_report_entry(report: *const DacReport, index: usize, out: *mut DacReportEntry) -> DacStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(DacStatus::NullPointer, "report or out is null");
        }
        let r = &*report;
        let Some(id) = r.order.get(index) else {
            return fail(
                DacStatus::InvalidArgument,
                format!("index {index} out of range for {} experts", r.order.len()),
            );
        };
        let e = r.report.entry(id).expect("every input expert is scored");
        *out = DacReportEntry {
            kl_value: e.kl_value,
            dac_value: e.dac_value,
            conflict: e.conflict,
            rank: e.rank,
        };
        DacStatus::Ok
    })
}

/// Pretty JSON of the report; release with [`dac_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dac_report_to_json(report: *const DacReport, out: *mut *mut c_char) -> DacStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(DacStatus::NullPointer, "report or out is null");
        }
        *out = into_c_string((*report).json.clone());
        DacStatus::Ok
    })
}

/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dac_report_free(report: *mut DacReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
