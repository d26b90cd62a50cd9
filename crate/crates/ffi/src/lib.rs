//! C interface to `opa-core`.
//!
//! Objects cross the boundary as opaque handles (`OpaWeight`, `OpaPoly`,
//! `OpaResult`) created by `opa_*_new`/`opa_*_from_*` functions and released
//! with the matching `opa_*_free`. Every fallible function returns an
//! [`OpaStatus`]; on failure `opa_last_error_message` describes the most
//! recent error on the calling thread. Outputs are written through pointer
//! arguments only on success.
//!
//! The exponent `p` is passed as a `double`, with `INFINITY` standing for
//! `p = inf`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use opa_core::opa::{closed_form_one_minus_zd, solve_flat, solve_structural};
use opa_core::rates::{classify, lower_bound, lower_bound_spec, Regime, SweepProblem, SweepSolver};
use opa_core::{
    CircleZeroSpec, Exponent, OpaError, Poly, SolverKind, SolverOpts, SpaceParams, TailRule, Weight,
};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpaStatus {
    Ok = 0,
    NullPointer = 1,
    Argument = 2,
    Parse = 3,
    Admissibility = 4,
    UnsupportedExponent = 5,
    Inapplicable = 6,
    NTooSmall = 7,
    InexactDivision = 8,
    IllConditioned = 9,
    NotConverged = 10,
    Internal = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Solver selection for `opa_solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpaSolver {
    /// Closed form for `c (1 - z^d)`, flat solver at `p = 1, inf`, Hilbert
    /// solve at `p = 2`, convex solver otherwise.
    Auto = 0,
    Convex = 1,
    Hilbert = 2,
    Structural = 3,
    Flat = 4,
    Closed = 5,
    Composite = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpaTail {
    Constant = 0,
    Power = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpaRegime {
    PowerDecay = 0,
    LogDecay = 1,
    Stagnation = 2,
}

/// Decay prediction for a power weight, describing `||1 - p_n f||^p` for
/// finite `p` and the norm itself at `p = inf`. `exponent` is the power of
/// `n + d + 1` under `PowerDecay`, the power of `log(n + d + 2)` under
/// `LogDecay`, and `0` under `Stagnation`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpaRatePrediction {
    pub regime: OpaRegime,
    pub exponent: f64,
    pub cyclic: bool,
}

/// Solver options; obtain defaults from `opa_solver_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpaSolverOptions {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub flat_tol: f64,
    pub system_tol: f64,
    pub step_tol: f64,
    pub warm_start: bool,
}

impl From<OpaSolverOptions> for SolverOpts {
    fn from(o: OpaSolverOptions) -> Self {
        SolverOpts {
            grad_tol: o.grad_tol,
            max_iters: o.max_iters,
            flat_tol: o.flat_tol,
            system_tol: o.system_tol,
            step_tol: o.step_tol,
            warm_start: o.warm_start,
        }
    }
}

/// Opaque weight sequence.
pub struct OpaWeight(Weight);

/// Opaque polynomial, remembering its circle zeros when built from them.
pub struct OpaPoly {
    f: Poly,
    spec: Option<CircleZeroSpec>,
}

/// Opaque solve result.
pub struct OpaResult(opa_core::OpaResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(e: &OpaError) -> OpaStatus {
    match e {
        OpaError::Argument(_) => OpaStatus::Argument,
        OpaError::Parse(_) => OpaStatus::Parse,
        OpaError::Admissibility(_) => OpaStatus::Admissibility,
        OpaError::UnsupportedExponent(_) => OpaStatus::UnsupportedExponent,
        OpaError::Inapplicable(_) => OpaStatus::Inapplicable,
        OpaError::NTooSmall { .. } => OpaStatus::NTooSmall,
        OpaError::InexactDivision { .. } => OpaStatus::InexactDivision,
        OpaError::IllConditioned { .. } => OpaStatus::IllConditioned,
        OpaError::Sweep(_) => OpaStatus::NotConverged,
        OpaError::Internal(_) => OpaStatus::Internal,
    }
}

struct Failure(OpaStatus, String);

impl From<OpaError> for Failure {
    fn from(e: OpaError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OpaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> OpaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => OpaStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            OpaStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn exponent(p: f64) -> Result<Exponent, Failure> {
    if p == f64::INFINITY {
        Ok(Exponent::Infinity)
    } else if p.is_finite() && p >= 1.0 {
        Ok(Exponent::Finite(p))
    } else {
        Err(Failure(
            OpaStatus::Argument,
            format!("exponent p = {p} must lie in [1, inf]"),
        ))
    }
}

unsafe fn space(p: f64, w: *const OpaWeight) -> Result<SpaceParams, Failure> {
    let w = borrow(w, "weight")?;
    Ok(SpaceParams::new(exponent(p)?, w.0.clone())?)
}

/// Copies the coefficients of `poly` into `re`/`im` (each of capacity
/// `cap`) and stores the count in `len`. With `cap` too small nothing is
/// copied, `len` receives the needed size, and `BufferTooSmall` is returned.
unsafe fn copy_coeffs(
    poly: &Poly,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> Result<(), Failure> {
    let coeffs = poly.coeffs();
    write_out(len, coeffs.len(), "len")?;
    if coeffs.len() > cap {
        return Err(Failure(
            OpaStatus::BufferTooSmall,
            format!("buffer holds {cap} coefficients, {} needed", coeffs.len()),
        ));
    }
    if coeffs.is_empty() {
        return Ok(());
    }
    if re.is_null() {
        return Err(null("re"));
    }
    for (k, c) in coeffs.iter().enumerate() {
        *re.add(k) = c.re;
        if !im.is_null() {
            *im.add(k) = c.im;
        }
    }
    Ok(())
}

/// Copies the last error message on this thread into `buf` (capacity
/// `cap`, NUL-terminated, truncated if needed) and returns the full message
/// length excluding the terminator. `buf` may be null to query the length.
#[no_mangle]
pub unsafe extern "C" fn opa_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let message = e.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn opa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn opa_solver_options_default() -> OpaSolverOptions {
    let d = SolverOpts::default();
    OpaSolverOptions {
        grad_tol: d.grad_tol,
        max_iters: d.max_iters,
        flat_tol: d.flat_tol,
        system_tol: d.system_tol,
        step_tol: d.step_tol,
        warm_start: d.warm_start,
    }
}

/// Power weight `w_k = (k+1)^alpha`.
#[no_mangle]
pub unsafe extern "C" fn opa_weight_power(alpha: f64, out: *mut *mut OpaWeight) -> OpaStatus {
    guard(|| {
        let w = Weight::power(alpha)?;
        write_out(out, Box::into_raw(Box::new(OpaWeight(w))), "out")
    })
}

/// Tabulated weight `values[0..len]` (with `values[0] = 1`), extended past
/// the table by `tail`.
#[no_mangle]
pub unsafe extern "C" fn opa_weight_table(
    values: *const f64,
    len: usize,
    tail: OpaTail,
    out: *mut *mut OpaWeight,
) -> OpaStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let slice = std::slice::from_raw_parts(values, len).to_vec();
        let tail = match tail {
            OpaTail::Constant => TailRule::Constant,
            OpaTail::Power => TailRule::Power,
        };
        let w = Weight::table(slice, tail)?;
        write_out(out, Box::into_raw(Box::new(OpaWeight(w))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn opa_weight_at(w: *const OpaWeight, k: usize, out: *mut f64) -> OpaStatus {
    guard(|| write_out(out, borrow(w, "weight")?.0.at(k), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn opa_weight_doubling_constant(
    w: *const OpaWeight,
    out: *mut f64,
) -> OpaStatus {
    guard(|| write_out(out, borrow(w, "weight")?.0.doubling_constant(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn opa_weight_free(w: *mut OpaWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Polynomial with coefficients `re[k] + i im[k]`, `k < len`, lowest degree
/// first. `im` may be null for real coefficients.
#[no_mangle]
pub unsafe extern "C" fn opa_poly_from_coeffs(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut OpaPoly,
) -> OpaStatus {
    guard(|| {
        if re.is_null() && len > 0 {
            return Err(null("re"));
        }
        let coeffs = (0..len)
            .map(|k| Complex64::new(*re.add(k), if im.is_null() { 0.0 } else { *im.add(k) }))
            .collect();
        let f = Poly::new(coeffs);
        write_out(
            out,
            Box::into_raw(Box::new(OpaPoly { f, spec: None })),
            "out",
        )
    })
}

/// Polynomial from zeros on the unit circle, written `angle:mult,...`
/// (angles such as `0`, `pi/2`, `3pi/4`), scaled so that `f(0) = 1`.
#[no_mangle]
pub unsafe extern "C" fn opa_poly_from_roots(
    roots: *const c_char,
    out: *mut *mut OpaPoly,
) -> OpaStatus {
    guard(|| {
        if roots.is_null() {
            return Err(null("roots"));
        }
        let text = CStr::from_ptr(roots)
            .to_str()
            .map_err(|_| Failure(OpaStatus::Parse, "roots is not valid UTF-8".into()))?;
        let spec = CircleZeroSpec::parse_roots(text)?.normalized_at_origin();
        let f = spec.expand();
        write_out(
            out,
            Box::into_raw(Box::new(OpaPoly {
                f,
                spec: Some(spec),
            })),
            "out",
        )
    })
}

/// Degree of `poly`, or `-1` for the zero polynomial.
#[no_mangle]
pub unsafe extern "C" fn opa_poly_degree(poly: *const OpaPoly, out: *mut i64) -> OpaStatus {
    guard(|| {
        let degree = borrow(poly, "poly")?.f.degree().map_or(-1, |d| d as i64);
        write_out(out, degree, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn opa_poly_coeffs(
    poly: *const OpaPoly,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> OpaStatus {
    guard(|| copy_coeffs(&borrow(poly, "poly")?.f, re, im, cap, len))
}

#[no_mangle]
pub unsafe extern "C" fn opa_poly_free(poly: *mut OpaPoly) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Optimal approximant of degree `n` to `1/f` in `l^p_A(w)`.
///
/// `opts` may be null for defaults. A result that did not reach its
/// tolerance is still returned, with `opa_result_converged` false.
#[no_mangle]
pub unsafe extern "C" fn opa_solve(
    f: *const OpaPoly,
    n: usize,
    p: f64,
    w: *const OpaWeight,
    solver: OpaSolver,
    opts: *const OpaSolverOptions,
    out: *mut *mut OpaResult,
) -> OpaStatus {
    guard(|| {
        let poly = borrow(f, "f")?;
        let sp = space(p, w)?;
        let opts: SolverOpts = opts
            .as_ref()
            .map_or_else(SolverOpts::default, |o| (*o).into());
        let result = match solver {
            OpaSolver::Structural => {
                let spec = poly.spec.as_ref().ok_or_else(|| {
                    Failure(
                        OpaStatus::Inapplicable,
                        "structural solver needs a polynomial built from roots".into(),
                    )
                })?;
                solve_structural(spec, n, &sp, None, &opts)?.0
            }
            OpaSolver::Flat => solve_flat(&poly.f, n, &sp, &opts)?.0,
            other => {
                let choice = match other {
                    OpaSolver::Auto => SweepSolver::Auto,
                    OpaSolver::Convex => SweepSolver::Fixed(SolverKind::Convex),
                    OpaSolver::Hilbert => SweepSolver::Fixed(SolverKind::Hilbert),
                    OpaSolver::Closed => SweepSolver::Fixed(SolverKind::Closed),
                    _ => SweepSolver::Fixed(SolverKind::Composite),
                };
                let problem = SweepProblem {
                    f: poly.f.clone(),
                    spec: poly.spec.clone(),
                };
                problem.solve(n, &sp, choice, &opts)?
            }
        };
        write_out(out, Box::into_raw(Box::new(OpaResult(result))), "out")
    })
}

/// Closed-form approximant of degree `n` to `1/(1 - z^d)` for `1 < p < inf`.
#[no_mangle]
pub unsafe extern "C" fn opa_closed_form(
    d: usize,
    n: usize,
    p: f64,
    w: *const OpaWeight,
    out: *mut *mut OpaResult,
) -> OpaStatus {
    guard(|| {
        let sp = space(p, w)?;
        let result = closed_form_one_minus_zd(d, n, &sp)?;
        write_out(out, Box::into_raw(Box::new(OpaResult(result))), "out")
    })
}

/// `(sum_{t<=n+d} w_t^{-q/p})^{-1/q}`, a lower bound for every
/// `||1 - P f||` with `deg P <= n`, when `f` vanishes on the unit circle.
#[no_mangle]
pub unsafe extern "C" fn opa_lower_bound(
    f: *const OpaPoly,
    n: usize,
    p: f64,
    w: *const OpaWeight,
    out: *mut f64,
) -> OpaStatus {
    guard(|| {
        let poly = borrow(f, "f")?;
        let sp = space(p, w)?;
        let bound = match &poly.spec {
            Some(spec) => lower_bound_spec(spec, n, &sp)?,
            None => lower_bound(&poly.f, n, &sp)?,
        };
        write_out(out, bound, "out")
    })
}

/// Decay regime and cyclicity for the power weight `(k+1)^alpha`.
#[no_mangle]
pub unsafe extern "C" fn opa_classify(
    p: f64,
    alpha: f64,
    out: *mut OpaRatePrediction,
) -> OpaStatus {
    guard(|| {
        let prediction = classify(exponent(p)?, alpha);
        let (regime, exponent) = match prediction.regime {
            Regime::PowerDecay { exponent } => (OpaRegime::PowerDecay, exponent),
            Regime::LogDecay { log_exponent } => (OpaRegime::LogDecay, log_exponent),
            Regime::Stagnation => (OpaRegime::Stagnation, 0.0),
        };
        write_out(
            out,
            OpaRatePrediction {
                regime,
                exponent,
                cyclic: prediction.cyclic,
            },
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn opa_result_optimal_norm(r: *const OpaResult, out: *mut f64) -> OpaStatus {
    guard(|| write_out(out, borrow(r, "result")?.0.optimal_norm, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn opa_result_converged(r: *const OpaResult, out: *mut bool) -> OpaStatus {
    guard(|| write_out(out, borrow(r, "result")?.0.converged, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn opa_result_iterations(r: *const OpaResult, out: *mut usize) -> OpaStatus {
    guard(|| write_out(out, borrow(r, "result")?.0.iterations, "out"))
}

/// Largest normalized orthogonality residual, or NaN at `p = 1, inf`.
#[no_mangle]
pub unsafe extern "C" fn opa_result_ortho_residual_max(
    r: *const OpaResult,
    out: *mut f64,
) -> OpaStatus {
    guard(|| {
        write_out(
            out,
            borrow(r, "result")?
                .0
                .ortho_residual_max
                .unwrap_or(f64::NAN),
            "out",
        )
    })
}

/// Coefficients of the approximant `p_n`; buffer protocol as in
/// `opa_poly_coeffs`.
#[no_mangle]
pub unsafe extern "C" fn opa_result_approximant(
    r: *const OpaResult,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> OpaStatus {
    guard(|| copy_coeffs(&borrow(r, "result")?.0.approximant, re, im, cap, len))
}

/// Coefficients of the residual `1 - p_n f`.
#[no_mangle]
pub unsafe extern "C" fn opa_result_residual(
    r: *const OpaResult,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> OpaStatus {
    guard(|| copy_coeffs(&borrow(r, "result")?.0.residual, re, im, cap, len))
}

#[no_mangle]
pub unsafe extern "C" fn opa_result_free(r: *mut OpaResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
