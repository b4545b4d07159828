//! C ABI over the `homleap` simulator.
//!
//! Every fallible call returns a [`HomleapStatus`]; on failure a description is
//! available from [`homleap_last_error`] on the same thread. Distributions are
//! opaque handles created by the `homleap_distribution_*` constructors and
//! released with [`homleap_distribution_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use homleap::channels::{Detector, DistinguishabilityAngle, RotatedBeam};
use homleap::cli::scenario::{Scenario, SourceQuality};
use homleap::metrics::{predicted_variance, visibility_fock};
use homleap::{BeamSplitter, Error, FockPair, Rational, Scalar};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomleapStatus {
    Ok = 0,
    NullPointer = 1,
    ParityMismatch = 2,
    OutOfRange = 3,
    OffLattice = 4,
    Degenerate = 5,
    NoSolution = 6,
    NotNormalized = 7,
    Negative = 8,
    ParityViolation = 9,
    Invalid = 10,
    Panic = 11,
}

impl From<&Error> for HomleapStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ParityMismatch { .. } => HomleapStatus::ParityMismatch,
            Error::Range { .. } => HomleapStatus::OutOfRange,
            Error::Lattice { .. } => HomleapStatus::OffLattice,
            Error::Degenerate(_) => HomleapStatus::Degenerate,
            Error::NoSolution(_) => HomleapStatus::NoSolution,
            Error::Normalization { .. } => HomleapStatus::NotNormalized,
            Error::Negative { .. } => HomleapStatus::Negative,
            Error::ParityViolation { .. } => HomleapStatus::ParityViolation,
            Error::Mode(_) | Error::Domain(_) | Error::Parse(_) => HomleapStatus::Invalid,
        }
    }
}

/// Probability distribution over the output difference `Δ_out`.
pub struct HomleapDistribution {
    rows: Vec<(i64, f64)>,
}

/// Imperfections applied on top of an ideal run. Zero-initialise and set
/// the fields you need, or start from `homleap_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HomleapOptions {
    /// Polarization mismatch in radians, within `[0, π/2]`.
    pub distinguishability: f64,
    /// Rotate the polarization of the second input instead of the first.
    pub rotate_second: bool,
    /// Source quality `η` in `(0, 1]`; values `<= 0` mean a pure source.
    pub source_eta: f64,
    /// Detector efficiency in `(0, 1]`; values `<= 0` mean ideal detectors.
    pub detector_efficiency: f64,
    /// Detector resolution in counts; `0` and `1` mean single-count resolution.
    pub resolution: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), HomleapStatus>) -> HomleapStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HomleapStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            HomleapStatus::Panic
        }
    }
}

fn fail(e: Error) -> HomleapStatus {
    let status = HomleapStatus::from(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> HomleapStatus {
    set_error(format!("{what} is null"));
    HomleapStatus::NullPointer
}

fn build(total: u32, delta: i64, r: f64, opts: &HomleapOptions) -> Result<Scenario, Error> {
    let pair = FockPair::new(total, delta)?;
    let mut sc = Scenario::pure(pair, BeamSplitter::new(r)?);
    sc.angle = DistinguishabilityAngle::new(opts.distinguishability)?;
    sc.rotated = if opts.rotate_second { RotatedBeam::B } else { RotatedBeam::A };
    if opts.source_eta > 0.0 {
        sc.source = SourceQuality::Eta(<Rational as Scalar>::from_f64(opts.source_eta));
    }
    let efficiency = if opts.detector_efficiency > 0.0 { opts.detector_efficiency } else { 1.0 };
    sc.detector = Detector::new(efficiency, opts.resolution.max(1))?;
    Ok(sc)
}

/// Options describing an ideal run.
#[no_mangle]
pub extern "C" fn homleap_options_default() -> HomleapOptions {
    HomleapOptions {
        distinguishability: 0.0,
        rotate_second: false,
        source_eta: 1.0,
        detector_efficiency: 1.0,
        resolution: 1,
    }
}

/// Distribution of `Δ_out` for `total` photons with input difference `delta`
/// at reflectivity `r`. `options` may be null for an ideal run.
///
/// # Safety
/// `options` must be null or point to a valid `HomleapOptions`; `out` must be
/// a valid pointer. On success `*out` owns a handle to free with
/// `homleap_distribution_free`.
#[no_mangle]
pub unsafe extern "C" fn homleap_distribution_new(
    total: u32,
    delta: i64,
    r: f64,
    options: *const HomleapOptions,
    out: *mut *mut HomleapDistribution,
) -> HomleapStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let opts = options.as_ref().copied().unwrap_or_else(|| homleap_options_default());
        let rows = build(total, delta, r, &opts)
            .and_then(|sc| sc.compute::<f64>())
            .map_err(fail)?;
        *out = Box::into_raw(Box::new(HomleapDistribution { rows }));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `dist` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn homleap_distribution_free(dist: *mut HomleapDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of `(Δ_out, probability)` rows; zero for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn homleap_distribution_len(dist: *const HomleapDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.rows.len())
}

/// Row `index` in ascending `Δ_out` order.
///
/// # Safety
/// `dist` must be a live handle; `delta_out` and `probability` must be valid.
#[no_mangle]
pub unsafe extern "C" fn homleap_distribution_row(
    dist: *const HomleapDistribution,
    index: usize,
    delta_out: *mut i64,
    probability: *mut f64,
) -> HomleapStatus {
    guard(|| {
        let d = dist.as_ref().ok_or_else(|| null("dist"))?;
        if delta_out.is_null() || probability.is_null() {
            return Err(null("output pointer"));
        }
        let Some(&(at, p)) = d.rows.get(index) else {
            set_error(format!("row {index} out of range for {} rows", d.rows.len()));
            return Err(HomleapStatus::OutOfRange);
        };
        *delta_out = at;
        *probability = p;
        Ok(())
    })
}

/// Probability of one `Δ_out`; zero when the value has no row.
///
/// # Safety
/// `dist` must be a live handle; `probability` must be valid.
#[no_mangle]
pub unsafe extern "C" fn homleap_distribution_probability(
    dist: *const HomleapDistribution,
    delta_out: i64,
    probability: *mut f64,
) -> HomleapStatus {
    guard(|| {
        let d = dist.as_ref().ok_or_else(|| null("dist"))?;
        let p = probability.as_mut().ok_or_else(|| null("probability"))?;
        *p = d.rows.iter().find(|(at, _)| *at == delta_out).map_or(0.0, |r| r.1);
        Ok(())
    })
}

/// Mean and variance of `Δ_out`. Either output pointer may be null.
///
/// # Safety
/// `dist` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn homleap_distribution_moments(
    dist: *const HomleapDistribution,
    mean: *mut f64,
    variance: *mut f64,
) -> HomleapStatus {
    guard(|| {
        let d = dist.as_ref().ok_or_else(|| null("dist"))?;
        let m: f64 = d.rows.iter().map(|&(x, p)| x as f64 * p).sum();
        let v: f64 = d.rows.iter().map(|&(x, p)| (x as f64 - m).powi(2) * p).sum();
        if let Some(out) = mean.as_mut() {
            *out = m;
        }
        if let Some(out) = variance.as_mut() {
            *out = v;
        }
        Ok(())
    })
}

/// Closed-form variance of `Δ_out` for an ideal run.
///
/// # Safety
/// `variance` must be valid.
#[no_mangle]
pub unsafe extern "C" fn homleap_predicted_variance(
    total: u32,
    delta: i64,
    r: f64,
    variance: *mut f64,
) -> HomleapStatus {
    guard(|| {
        let out = variance.as_mut().ok_or_else(|| null("variance"))?;
        let pair = FockPair::new(total, delta).map_err(fail)?;
        BeamSplitter::new(r).map_err(fail)?;
        *out = predicted_variance(pair.total(), pair.delta(), &r);
        Ok(())
    })
}

/// Two-photon-interference visibility for `n` and `m` photons at
/// reflectivity `r`, with whether it exceeds the classical bound of one half.
///
/// # Safety
/// `value` must be valid; `nonclassical` may be null.
#[no_mangle]
pub unsafe extern "C" fn homleap_visibility(
    n: u32,
    m: u32,
    r: f64,
    value: *mut f64,
    nonclassical: *mut bool,
) -> HomleapStatus {
    guard(|| {
        let out = value.as_mut().ok_or_else(|| null("value"))?;
        let v = visibility_fock(n, m, &r).map_err(fail)?;
        *out = v.value;
        if let Some(flag) = nonclassical.as_mut() {
            *flag = v.nonclassical;
        }
        Ok(())
    })
}

/// Description of the last failure on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn homleap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn homleap_status_name(status: HomleapStatus) -> *const c_char {
    let name: &'static CStr = match status {
        HomleapStatus::Ok => c"ok",
        HomleapStatus::NullPointer => c"null pointer",
        HomleapStatus::ParityMismatch => c"parity mismatch",
        HomleapStatus::OutOfRange => c"out of range",
        HomleapStatus::OffLattice => c"off lattice",
        HomleapStatus::Degenerate => c"degenerate",
        HomleapStatus::NoSolution => c"no solution",
        HomleapStatus::NotNormalized => c"not normalized",
        HomleapStatus::Negative => c"negative probability",
        HomleapStatus::ParityViolation => c"parity violation",
        HomleapStatus::Invalid => c"invalid input",
        HomleapStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn homleap_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains a nul"),
    };
    VERSION.as_ptr()
}
