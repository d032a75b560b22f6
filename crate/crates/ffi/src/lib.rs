//! C interface to `pointdisp`.
//!
//! Objects cross the boundary as opaque handles created by `pd_*_new` style
//! functions and released with the matching `pd_*_free`. Every fallible call
//! returns a [`PdStatus`]; on failure a message is kept per thread and can be
//! read with [`pd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pointdisp::config::{InteractionConfig, Strength};
use pointdisp::decay::{self, DecayCase, GaussianData};
use pointdisp::gamma;
use pointdisp::grid::RadialFunction;
use pointdisp::norms::{lp_norm, Weighting};
use pointdisp::propagator::{evolve, EvolutionRequest, Projection};
use pointdisp::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Centers or strengths do not form a valid configuration.
    InvalidConfig = 3,
    /// Evaluation at a singular point or pole.
    Singular = 4,
    /// A norm or integral diverges.
    Divergent = 5,
    /// An iterative or adaptive step did not reach its tolerance.
    NoConvergence = 6,
    /// The output buffer is shorter than the result; the required length is
    /// still reported.
    BufferTooSmall = 7,
    Io = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

impl From<&Error> for PdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Empty | Error::DuplicateCenter(..) | Error::LengthMismatch { .. } | Error::ConfigParse(_) => {
                PdStatus::InvalidConfig
            }
            Error::SingularPoint | Error::Origin | Error::AtPole(..) => PdStatus::Singular,
            Error::Divergent(_) | Error::ZeroDenominator => PdStatus::Divergent,
            Error::FitDiverged(_)
            | Error::OscillationUnresolved { .. }
            | Error::TailTooLarge(_)
            | Error::NoConvergence(_) => PdStatus::NoConvergence,
            Error::Io(_) => PdStatus::Io,
            _ => PdStatus::InvalidArgument,
        }
    }
}

/// Opaque interaction configuration.
pub struct PdConfig(InteractionConfig);

/// Opaque radial function `f(x) = f̃(|x|)` sampled on a radial grid.
pub struct PdRadial(RadialFunction);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdProjection {
    /// Remove the bound-state component first.
    Ac = 0,
    Full = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdDecayCase {
    Generic = 0,
    Resonant = 1,
    ResonantEndpoint = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: PdStatus, msg: &str) -> PdStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> PdStatus {
    fail(PdStatus::from(&e), &e.to_string())
}

/// Run `f`, converting panics and errors to status codes.
fn guard(f: impl FnOnce() -> Result<(), PdStatus>) -> PdStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PdStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PdStatus::Panic, &msg)
        }
    }
}

fn lift<T>(r: pointdisp::Result<T>) -> Result<T, PdStatus> {
    r.map_err(from_error)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), PdStatus> {
    if p.is_null() {
        Err(fail(PdStatus::NullPointer, &format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or `""`. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn pd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pd_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}

/// Build a configuration from `n` centers (`3n` doubles, x y z per center)
/// and `n` strengths; `+INFINITY` marks an inert center.
///
/// # Safety
/// `centers` must point to `3n` doubles, `strengths` to `n` doubles and
/// `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pd_config_new(
    centers: *const f64,
    strengths: *const f64,
    n: usize,
    out: *mut *mut PdConfig,
) -> PdStatus {
    guard(|| {
        non_null(out, "out")?;
        if n > 0 {
            non_null(centers, "centers")?;
            non_null(strengths, "strengths")?;
        }
        let (c, a) = if n == 0 {
            (&[][..], &[][..])
        } else {
            // SAFETY: caller guarantees the lengths.
            unsafe { (std::slice::from_raw_parts(centers, 3 * n), std::slice::from_raw_parts(strengths, n)) }
        };
        let pts = c.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
        let st = a.iter().map(|&v| Strength::from(v)).collect();
        let cfg = lift(InteractionConfig::new(pts, st))?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PdConfig(cfg))) };
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`pd_config_new`] and not have been freed; null is
/// accepted.
#[no_mangle]
pub unsafe extern "C" fn pd_config_free(cfg: *mut PdConfig) {
    if !cfg.is_null() {
        // SAFETY: allocated by pd_config_new.
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Negative eigenvalues `−λ²` (with multiplicity, ascending `λ`). `count`
/// receives the number found; at most `capacity` are written.
///
/// # Safety
/// `cfg` must be a live handle, `eigenvalues` must hold `capacity` doubles
/// (may be null when `capacity == 0`) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_spectrum(
    cfg: *const PdConfig,
    eigenvalues: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> PdStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(count, "count")?;
        if capacity > 0 {
            non_null(eigenvalues, "eigenvalues")?;
        }
        // SAFETY: live handle per contract.
        let cfg = unsafe { &(*cfg).0 };
        let poles = lift(gamma::find_poles(cfg, gamma::default_lambda_max(cfg)))?;
        let ev: Vec<f64> = poles
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.eigenvalue(), p.multiplicity))
            .collect();
        // SAFETY: buffers sized per contract.
        unsafe {
            *count = ev.len();
            for (i, v) in ev.iter().take(capacity).enumerate() {
                *eigenvalues.add(i) = *v;
            }
        }
        if ev.len() > capacity {
            return Err(fail(PdStatus::BufferTooSmall, &format!("need {} slots", ev.len())));
        }
        Ok(())
    })
}

/// `ψ_α(r) = √(−2α) e^{4παr}/r` for `α < 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_bound_state_value(alpha: f64, r: f64, out: *mut f64) -> PdStatus {
    guard(|| {
        non_null(out, "out")?;
        if alpha >= 0.0 {
            return Err(from_error(Error::PositiveAlpha(alpha)));
        }
        if r <= 0.0 {
            return Err(from_error(Error::Origin));
        }
        // SAFETY: checked non-null.
        unsafe { *out = gamma::bound_state_value(alpha, r) };
        Ok(())
    })
}

/// Radial Gaussian `e^{−r²/σ²}` on the grid used by the decay experiments.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_radial_gaussian(width2: f64, out: *mut *mut PdRadial) -> PdStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(width2 > 0.0 && width2.is_finite()) {
            return Err(fail(PdStatus::InvalidArgument, "width2 must be positive"));
        }
        let f = GaussianData { width2 }.sample();
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(PdRadial(f))) };
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not have been freed; null is accepted.
#[no_mangle]
pub unsafe extern "C" fn pd_radial_free(f: *mut PdRadial) {
    if !f.is_null() {
        // SAFETY: allocated by this library.
        drop(unsafe { Box::from_raw(f) });
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `f` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pd_radial_len(f: *const PdRadial) -> usize {
    if f.is_null() {
        0
    } else {
        // SAFETY: live handle per contract.
        unsafe { (*f).0.values.len() }
    }
}

/// Sample `i`: radius and complex value.
///
/// # Safety
/// `f` must be a live handle; `r`, `re`, `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_radial_get(
    f: *const PdRadial,
    i: usize,
    r: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> PdStatus {
    guard(|| {
        non_null(f, "f")?;
        non_null(r, "r")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        // SAFETY: live handle per contract.
        let f = unsafe { &(*f).0 };
        if i >= f.values.len() {
            return Err(fail(PdStatus::InvalidArgument, &format!("index {i} out of range")));
        }
        // SAFETY: checked non-null.
        unsafe {
            *r = f.grid.nodes()[i];
            *re = f.values[i].re;
            *im = f.values[i].im;
        }
        Ok(())
    })
}

/// Unweighted `‖f‖_p` over `ℝ³`; `p = INFINITY` gives the sample maximum.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_radial_lp_norm(f: *const PdRadial, p: f64, out: *mut f64) -> PdStatus {
    guard(|| {
        non_null(f, "f")?;
        non_null(out, "out")?;
        // SAFETY: live handle per contract.
        let v = lift(lp_norm(unsafe { &(*f).0 }, p, &Weighting::unit()))?;
        // SAFETY: checked non-null.
        unsafe { *out = v };
        Ok(())
    })
}

/// `e^{−itH} f` for a single-center configuration; the result is a new handle.
///
/// # Safety
/// `cfg` and `f` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_evolve(
    cfg: *const PdConfig,
    f: *const PdRadial,
    t: f64,
    projection: PdProjection,
    out: *mut *mut PdRadial,
) -> PdStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(f, "f")?;
        non_null(out, "out")?;
        let proj = match projection {
            PdProjection::Ac => Projection::Ac,
            PdProjection::Full => Projection::Full,
        };
        // SAFETY: live handles per contract.
        let (cfg, f) = unsafe { (&(*cfg).0, &(*f).0) };
        let req = EvolutionRequest::new(cfg.clone(), f.clone(), t).projection(proj);
        let res = lift(evolve(&req))?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(PdRadial(res.output))) };
        Ok(())
    })
}

/// Predicted decay exponent for dual `(p, q)`; `INFINITY` is allowed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_predicted_exponent(p: f64, q: f64, decay_case: PdDecayCase, out: *mut f64) -> PdStatus {
    guard(|| {
        non_null(out, "out")?;
        let case = match decay_case {
            PdDecayCase::Generic => DecayCase::Generic,
            PdDecayCase::Resonant => DecayCase::Resonant,
            PdDecayCase::ResonantEndpoint => DecayCase::ResonantEndpoint,
        };
        let v = lift(decay::predicted_exponent(p, q, case))?;
        // SAFETY: checked non-null.
        unsafe { *out = v };
        Ok(())
    })
}

/// Least-squares slope of `ln y` against `ln t` over `n ≥ 4` positive pairs.
///
/// # Safety
/// `t` and `y` must point to `n` doubles; `slope` and `std_error` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pd_fit_power_law(
    t: *const f64,
    y: *const f64,
    n: usize,
    slope: *mut f64,
    std_error: *mut f64,
) -> PdStatus {
    guard(|| {
        non_null(t, "t")?;
        non_null(y, "y")?;
        non_null(slope, "slope")?;
        non_null(std_error, "std_error")?;
        // SAFETY: lengths per contract.
        let (t, y) = unsafe { (std::slice::from_raw_parts(t, n), std::slice::from_raw_parts(y, n)) };
        let pts: Vec<(f64, f64)> = t.iter().cloned().zip(y.iter().cloned()).collect();
        let fit = lift(decay::fit_power_law(&pts))?;
        // SAFETY: checked non-null.
        unsafe {
            *slope = fit.slope;
            *std_error = fit.stderr;
        }
        Ok(())
    })
}
