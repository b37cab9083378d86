//! C interface to `sparsedep`.
//!
//! Samples live behind an opaque `SdSample` handle. Every fallible function
//! returns an `SdStatus`; on failure `sd_last_error_message` describes the
//! most recent error on the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sparsedep::calibration::{run_test, CalibrationMethod, CalibrationPlan, Statistic, TestKind};
use sparsedep::model::{sample_gmm, ModelParams, PairedSample, Regime};
use sparsedep::parametric::{extremes_pvalue, LrtParams};
use sparsedep::power::{theoretical_boundary, Boundary};
use sparsedep::rng::stream;
use sparsedep::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSample = 3,
    Tie = 4,
    Domain = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdTest {
    Lrt = 0,
    Cov = 1,
    Pearson = 2,
    Extremes = 3,
    Hc = 4,
    HcPlugin = 5,
    Spearman = 6,
    HcRank = 7,
}

impl From<SdTest> for TestKind {
    fn from(t: SdTest) -> Self {
        match t {
            SdTest::Lrt => TestKind::Lrt,
            SdTest::Cov => TestKind::Cov,
            SdTest::Pearson => TestKind::Pearson,
            SdTest::Extremes => TestKind::Extremes,
            SdTest::Hc => TestKind::Hc,
            SdTest::HcPlugin => TestKind::HcPlugin,
            SdTest::Spearman => TestKind::Spearman,
            SdTest::HcRank => TestKind::HcRank,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdCalibration {
    /// The test's usual calibration.
    Default = 0,
    Exact = 1,
    Permutation = 2,
    MonteCarlo = 3,
    Limiting = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdRegime {
    Dense = 0,
    Sparse = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdBoundaryKind {
    Gamma = 0,
    Powerless = 1,
    NoneProven = 2,
}

/// Result of a calibrated test. `p_value` is NaN when `has_p_value` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub has_p_value: bool,
    pub n: usize,
    pub seed: u64,
    pub calibration_reps: usize,
}

/// Opaque paired sample.
pub struct SdSample {
    inner: PairedSample,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SdStatus {
    match e {
        Error::Domain(_) => SdStatus::Domain,
        Error::InvalidSample(_) => SdStatus::InvalidSample,
        Error::Tie { .. } => SdStatus::Tie,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => SdStatus::Io,
        Error::Replicate { source, .. } => status_of(source),
        _ => SdStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for `sd_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), (SdStatus, String)>) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SdStatus::Panic
        }
    }
}

fn lib(e: Error) -> (SdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SdStatus, String) {
    (SdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (SdStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn sample_ref<'a>(s: *const SdSample) -> Result<&'a SdSample, (SdStatus, String)> {
    s.as_ref().ok_or_else(|| null("sample"))
}

fn lrt_params(test: SdTest, eps: f64, rho: f64) -> Result<Option<LrtParams>, (SdStatus, String)> {
    if test != SdTest::Lrt {
        return Ok(None);
    }
    if eps.is_nan() || rho.is_nan() {
        return Err((SdStatus::InvalidArgument, "the lrt test needs eps and rho".into()));
    }
    LrtParams::new(eps, rho).map(Some).map_err(lib)
}

/// Message for the last error on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `n` pairs into a new sample.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_sample_new(x: *const f64, y: *const f64, n: usize, out: *mut *mut SdSample) -> SdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let x = slice(x, n, "x")?.to_vec();
        let y = slice(y, n, "y")?.to_vec();
        let inner = PairedSample::new(x, y).map_err(lib)?;
        *out = Box::into_raw(Box::new(SdSample { inner }));
        Ok(())
    })
}

/// Draws `n` pairs from the mixture with weight `eps` and correlation `rho`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_sample_generate_gmm(
    eps: f64,
    rho: f64,
    n: usize,
    seed: u64,
    out: *mut *mut SdSample,
) -> SdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::new(eps, rho).map_err(lib)?;
        let inner = sample_gmm(&params, n, &mut stream(seed, &[])).map_err(lib)?;
        *out = Box::into_raw(Box::new(SdSample { inner }));
        Ok(())
    })
}

/// Number of pairs; 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_sample_len(sample: *const SdSample) -> usize {
    sample.as_ref().map_or(0, |s| s.inner.len())
}

/// Copies the sample into `x` and `y`, each with room for `capacity` values.
///
/// # Safety
/// `sample` must be a live handle; `x` and `y` must have `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_sample_copy(sample: *const SdSample, x: *mut f64, y: *mut f64, capacity: usize) -> SdStatus {
    guard(|| {
        let s = &sample_ref(sample)?.inner;
        if x.is_null() || y.is_null() {
            return Err(null("output buffer"));
        }
        if capacity < s.len() {
            return Err((
                SdStatus::InvalidArgument,
                format!("capacity {capacity} is below the sample size {}", s.len()),
            ));
        }
        ptr::copy_nonoverlapping(s.x().as_ptr(), x, s.len());
        ptr::copy_nonoverlapping(s.y().as_ptr(), y, s.len());
        Ok(())
    })
}

/// Releases a sample. Null is ignored.
///
/// # Safety
/// `sample` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_sample_free(sample: *mut SdSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Evaluates a test statistic without calibration. `eps` and `rho` are used
/// by the likelihood ratio test only; pass NaN otherwise.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_statistic(sample: *const SdSample, test: SdTest, eps: f64, rho: f64, out: *mut f64) -> SdStatus {
    guard(|| {
        let s = &sample_ref(sample)?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let stat = Statistic::new(test.into(), lrt_params(test, eps, rho)?).map_err(lib)?;
        *out = stat.evaluate(s.view()).map_err(lib)?;
        Ok(())
    })
}

/// Runs a calibrated test. `reps` of 0 selects the test's usual count.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_run_test(
    sample: *const SdSample,
    test: SdTest,
    calibration: SdCalibration,
    reps: usize,
    seed: u64,
    eps: f64,
    rho: f64,
    out: *mut SdOutcome,
) -> SdStatus {
    guard(|| {
        let s = &sample_ref(sample)?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = TestKind::from(test);
        let stat = Statistic::new(kind, lrt_params(test, eps, rho)?).map_err(lib)?;
        let method = match calibration {
            SdCalibration::Default => kind.default_method(),
            SdCalibration::Exact => CalibrationMethod::Exact,
            SdCalibration::Permutation => CalibrationMethod::Permutation,
            SdCalibration::MonteCarlo => CalibrationMethod::MonteCarlo,
            SdCalibration::Limiting => CalibrationMethod::Limiting,
        };
        let reps = if reps == 0 { kind.reference_reps() } else { reps };
        let outcome = run_test(s.view(), &stat, &CalibrationPlan::new(method, reps, seed)).map_err(lib)?;
        *out = SdOutcome {
            statistic: outcome.statistic,
            p_value: outcome.p_value.unwrap_or(f64::NAN),
            has_p_value: outcome.p_value.is_some(),
            n: outcome.n,
            seed: outcome.seed,
            calibration_reps: outcome.calibration_reps.unwrap_or(0),
        };
        Ok(())
    })
}

/// `P(|Z| <= t)` for a standard normal `Z`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_psi(t: f64, out: *mut f64) -> SdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = sparsedep::normal::psi(t).map_err(lib)?;
        Ok(())
    })
}

/// Exact null p-value of the extremes statistic `m` at sample size `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_extremes_pvalue(m: f64, n: u64, out: *mut f64) -> SdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = extremes_pvalue(m, n).map_err(lib)?;
        Ok(())
    })
}

/// Theoretical detection boundary. `gamma` is written only when `kind` is
/// `SD_BOUNDARY_KIND_GAMMA`; otherwise it is set to NaN.
///
/// # Safety
/// `kind` and `gamma` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_boundary(
    regime: SdRegime,
    beta: f64,
    test: SdTest,
    kind: *mut SdBoundaryKind,
    gamma: *mut f64,
) -> SdStatus {
    guard(|| {
        if kind.is_null() || gamma.is_null() {
            return Err(null("out"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err((SdStatus::Domain, format!("beta must lie in (0, 1), got {beta}")));
        }
        let regime = match regime {
            SdRegime::Dense => Regime::Dense,
            SdRegime::Sparse => Regime::Sparse,
        };
        let (k, g) = match theoretical_boundary(regime, beta, test.into()) {
            Boundary::Gamma(g) => (SdBoundaryKind::Gamma, g),
            Boundary::Powerless(_) => (SdBoundaryKind::Powerless, f64::NAN),
            Boundary::NoneProven(_) => (SdBoundaryKind::NoneProven, f64::NAN),
        };
        *kind = k;
        *gamma = g;
        Ok(())
    })
}
