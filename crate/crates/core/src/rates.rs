//! Decay of optimal norms: cyclicity classification for power weights, the
//! universal lower bound, `delta_k`, and empirical rate fits over sweeps.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{OpaError, Result};
use crate::opa::{
    assemble, closed_form_one_minus_zd, detect_one_minus_zd, solve_convex, solve_flat,
    solve_hilbert_in, OpaResult, SolverKind, SolverOpts,
};
use crate::poly::{CircleZeroSpec, Poly};
use crate::space::{Exponent, SpaceParams};

/// Ratio band used for the logarithmic boundary regime.
pub const DEFAULT_BAND: f64 = 10.0;
/// Smallest degree included in a rate fit.
pub const DEFAULT_MIN_N: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// `~ (n + d + 1)^exponent`
    PowerDecay { exponent: f64 },
    /// `~ log(n + d + 2)^log_exponent`
    LogDecay { log_exponent: f64 },
    /// Bounded below by a positive constant.
    Stagnation,
}

/// Predicted behaviour of the optimal norm for a polynomial whose zeros all
/// lie on the circle, in the power-weight space with exponents `(p, alpha)`.
///
/// For finite `p` the regime describes `||1 - p_n f||^p`; at `p = inf` it
/// describes the norm itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePrediction {
    pub regime: Regime,
    pub cyclic: bool,
}

impl RatePrediction {
    /// The predicted quantity up to a constant, or `None` under
    /// stagnation.
    pub fn predicted_value(&self, n: usize, d: usize) -> Option<f64> {
        let m = (n + d) as f64;
        match self.regime {
            Regime::PowerDecay { exponent } => Some((m + 1.0).powf(exponent)),
            Regime::LogDecay { log_exponent } => Some((m + 2.0).ln().powf(log_exponent)),
            Regime::Stagnation => None,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.cyclic {
            "cyclic"
        } else {
            "not cyclic"
        }
    }
}

/// Decay regime and cyclicity of polynomials with zeros on the circle in
/// `l^p_A((k+1)^alpha)`.
///
/// Comparisons against the threshold are exact, so `alpha = p - 1` is the
/// logarithmic case only when the two floats are equal.
pub fn classify(p: Exponent, alpha: f64) -> RatePrediction {
    match p {
        Exponent::Infinity => {
            let regime = if alpha < 1.0 {
                Regime::PowerDecay {
                    exponent: alpha - 1.0,
                }
            } else if alpha == 1.0 {
                Regime::LogDecay { log_exponent: -1.0 }
            } else {
                Regime::Stagnation
            };
            RatePrediction {
                regime,
                cyclic: alpha <= 1.0,
            }
        }
        Exponent::Finite(p) => {
            let threshold = p - 1.0;
            let regime = if alpha < threshold {
                Regime::PowerDecay {
                    exponent: alpha + 1.0 - p,
                }
            } else if alpha == threshold {
                Regime::LogDecay {
                    log_exponent: 1.0 - p,
                }
            } else {
                Regime::Stagnation
            };
            // at p = 1 the boundary alpha = 0 is not cyclic
            let cyclic = if p == 1.0 {
                alpha < 0.0
            } else {
                alpha <= threshold
            };
            RatePrediction { regime, cyclic }
        }
    }
}

/// `delta_k = (sum_{t<=k} w_t^{-q/p})^{1/q}` for `1 < p < inf`.
pub fn delta(k: usize, sp: &SpaceParams) -> Result<f64> {
    let p = sp.smooth_p()?;
    let q = p / (p - 1.0);
    let w = sp.weight();
    let s: f64 = (0..=k).map(|t| w.at(t).powf(-1.0 / (p - 1.0))).sum();
    Ok(s.powf(1.0 / q))
}

/// `(sum_{t<=n+d} w_t^{-q/p})^{-1/q}`, a lower bound for `||1 - Pf||` over
/// every `P` of degree at most `n` when `f` vanishes somewhere on the circle.
///
/// At `p = 1` this becomes `min_t w_t` and at `p = inf` it becomes
/// `1 / sum_t w_t^{-1}`.
pub fn lower_bound(f: &Poly, n: usize, sp: &SpaceParams) -> Result<f64> {
    let d = f
        .degree()
        .ok_or_else(|| OpaError::Argument("f must not be the zero polynomial".into()))?;
    if circle_zero(f).is_none() {
        return Err(OpaError::Inapplicable(
            "f has no zero on the unit circle".into(),
        ));
    }
    Ok(bound_for_length(n + d + 1, sp))
}

/// [`lower_bound`] for a polynomial given by its zeros.
pub fn lower_bound_spec(spec: &CircleZeroSpec, n: usize, sp: &SpaceParams) -> Result<f64> {
    if spec.roots().is_empty() {
        return Err(OpaError::Inapplicable("empty circle zero set".into()));
    }
    Ok(bound_for_length(n + spec.degree() + 1, sp))
}

fn bound_for_length(len: usize, sp: &SpaceParams) -> f64 {
    let w = sp.weight().values(len);
    match sp.p() {
        Exponent::Infinity => 1.0 / w.iter().map(|x| 1.0 / x).sum::<f64>(),
        Exponent::Finite(1.0) => w.iter().copied().fold(f64::INFINITY, f64::min),
        Exponent::Finite(p) => {
            let q = p / (p - 1.0);
            w.iter()
                .map(|x| x.powf(-1.0 / (p - 1.0)))
                .sum::<f64>()
                .powf(-1.0 / q)
        }
    }
}

/// A point of the unit circle where `f` vanishes, located by sampling
/// `|f|` and refining local minima with golden-section search.
pub fn circle_zero(f: &Poly) -> Option<Complex64> {
    let d = f.degree()?;
    if d == 0 {
        return None;
    }
    let scale: f64 = f.coeffs().iter().map(|c| c.norm()).sum();
    let samples = 64.max(32 * d);
    let step = std::f64::consts::TAU / samples as f64;
    let at = |theta: f64| f.eval(Complex64::from_polar(1.0, theta)).norm();
    let values: Vec<f64> = (0..samples).map(|k| at(k as f64 * step)).collect();
    let mut best: Option<(f64, f64)> = None;
    for k in 0..samples {
        let prev = values[(k + samples - 1) % samples];
        let next = values[(k + 1) % samples];
        if values[k] > prev || values[k] > next {
            continue;
        }
        let theta = golden_min(at, (k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let v = at(theta);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((theta, v));
        }
    }
    let (theta, v) = best?;
    (v <= 1e-8 * scale).then(|| Complex64::from_polar(1.0, theta))
}

fn golden_min(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (h(a), h(b));
    for _ in 0..80 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = h(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = h(b);
        }
    }
    0.5 * (lo + hi)
}

/// `{a, 2a, 4a, ...}` up to and including `b` (and `b` itself when it is not
/// a power-of-two multiple of `a`).
pub fn geometric_grid(a: usize, b: usize) -> Result<Vec<usize>> {
    if a == 0 || b < a {
        return Err(OpaError::Argument(format!("invalid degree range {a}..{b}")));
    }
    let mut grid = Vec::new();
    let mut n = a;
    while n <= b {
        grid.push(n);
        match n.checked_mul(2) {
            Some(next) => n = next,
            None => break,
        }
    }
    if grid.last() != Some(&b) {
        grid.push(b);
    }
    Ok(grid)
}

/// Solver used for each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepSolver {
    /// Closed form for `c (1 - z^d)`, the flat solver at `p = 1, inf`, the
    /// Hilbert solve at `p = 2`, and the convex solver otherwise.
    #[default]
    Auto,
    Fixed(SolverKind),
}

/// Solves for `1/f` at order `n` with the solver chosen by `choice`.
pub fn solve_with(
    f: &Poly,
    n: usize,
    sp: &SpaceParams,
    choice: SweepSolver,
    opts: &SolverOpts,
) -> Result<OpaResult> {
    let kind = match choice {
        SweepSolver::Fixed(kind) => kind,
        SweepSolver::Auto => {
            if sp.p().is_flat() {
                SolverKind::Flat
            } else if detect_one_minus_zd(f).is_some() {
                SolverKind::Closed
            } else if sp.p() == Exponent::Finite(2.0) {
                SolverKind::Hilbert
            } else {
                SolverKind::Convex
            }
        }
    };
    match kind {
        SolverKind::Convex => solve_convex(f, n, sp, opts),
        SolverKind::Hilbert => {
            if sp.p() != Exponent::Finite(2.0) {
                return Err(OpaError::UnsupportedExponent(format!(
                    "{} (hilbert needs p = 2)",
                    sp.p()
                )));
            }
            solve_hilbert_in(f, n, sp.weight(), sp)
        }
        SolverKind::Flat => Ok(solve_flat(f, n, sp, opts)?.0),
        SolverKind::Closed => {
            let d = detect_one_minus_zd(f).ok_or_else(|| {
                OpaError::Inapplicable("closed form needs f = c (1 - z^d)".into())
            })?;
            let closed = closed_form_one_minus_zd(d, n, sp)?;
            let c0 = f.coeff(0);
            let approximant = closed.approximant.scale(Complex64::new(1.0, 0.0) / c0);
            Ok(assemble(f, approximant, n, sp, 0, true, SolverKind::Closed))
        }
        SolverKind::Structural | SolverKind::Composite => Err(OpaError::Inapplicable(format!(
            "the {kind} solver needs the zeros of f; give the problem as circle roots"
        ))),
    }
}

/// One solved point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub d: usize,
    pub result: OpaResult,
    pub lower_bound: Option<f64>,
    pub predicted_value: Option<f64>,
    pub wall_ms: f64,
}

impl SweepPoint {
    /// `||.||^p` for finite `p`, the norm itself at `p = inf`.
    pub fn rate_value(&self) -> f64 {
        self.result.norm_p_power()
    }
}

/// A problem for a sweep: the polynomial and optionally its circle zeros,
/// which the structural and composite solvers need.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepProblem {
    pub f: Poly,
    pub spec: Option<CircleZeroSpec>,
}

impl SweepProblem {
    pub fn from_poly(f: Poly) -> Self {
        SweepProblem { f, spec: None }
    }

    pub fn from_spec(spec: CircleZeroSpec) -> Self {
        SweepProblem {
            f: spec.expand(),
            spec: Some(spec),
        }
    }

    pub fn solve(
        &self,
        n: usize,
        sp: &SpaceParams,
        choice: SweepSolver,
        opts: &SolverOpts,
    ) -> Result<OpaResult> {
        match (choice, &self.spec) {
            (SweepSolver::Fixed(SolverKind::Structural), Some(spec)) => {
                Ok(crate::opa::solve_structural(spec, n, sp, None, opts)?.0)
            }
            (SweepSolver::Fixed(SolverKind::Composite), Some(spec)) => {
                Ok(crate::opa::composite_construction(spec, n, sp)?.result)
            }
            _ => solve_with(&self.f, n, sp, choice, opts),
        }
    }

    fn lower_bound(&self, n: usize, sp: &SpaceParams) -> Option<f64> {
        match &self.spec {
            Some(spec) => lower_bound_spec(spec, n, sp).ok(),
            None => lower_bound(&self.f, n, sp).ok(),
        }
    }
}

/// Solves every point of `grid`, in parallel, returning points in grid
/// order. Non-converged points are kept; argument errors abort.
pub fn run_sweep(
    problem: &SweepProblem,
    sp: &SpaceParams,
    grid: &[usize],
    choice: SweepSolver,
    opts: &SolverOpts,
) -> Result<Vec<SweepPoint>> {
    let d = problem
        .f
        .degree()
        .ok_or_else(|| OpaError::Argument("f must not be the zero polynomial".into()))?;
    let prediction = sp.weight().alpha().map(|alpha| classify(sp.p(), alpha));
    grid.par_iter()
        .map(|&n| {
            let start = Instant::now();
            let result = problem.solve(n, sp, choice, opts)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(SweepPoint {
                n,
                d,
                lower_bound: problem.lower_bound(n, sp),
                predicted_value: prediction.and_then(|pr| pr.predicted_value(n, d)),
                result,
                wall_ms,
            })
        })
        .collect()
}

/// Empirical decay of the optimal norm over a sweep window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// `(n, optimal_norm)` for every point in the window.
    pub samples: Vec<(usize, f64)>,
    /// Least-squares slope of `log value` against `log(n + d + 1)`.
    pub fitted_exponent: f64,
    /// Slope of `log value` against `log log(n + d + 2)`, for the
    /// logarithmic regime.
    pub fitted_log_exponent: Option<f64>,
    pub r_squared: f64,
    /// `max / min` of `value / log(n+d+2)^log_exponent`, for the
    /// logarithmic regime.
    pub band_ratio: Option<f64>,
    /// Smallest value in the window.
    pub floor: f64,
    pub prediction: Option<RatePrediction>,
}

impl RateFit {
    /// Whether the fit is consistent with the prediction: the exponent
    /// within `tol`, the log band within `band`, or a floor of at least
    /// `floor_min` under stagnation.
    pub fn consistent(&self, tol: f64, band: f64, floor_min: f64) -> Option<bool> {
        let prediction = self.prediction?;
        Some(match prediction.regime {
            Regime::PowerDecay { exponent } => (self.fitted_exponent - exponent).abs() <= tol,
            Regime::LogDecay { .. } => self.band_ratio.is_some_and(|r| r <= band),
            Regime::Stagnation => self.floor >= floor_min,
        })
    }
}

/// Fits the decay of the points with `n >= min_n`.
pub fn fit_rate(
    points: &[SweepPoint],
    min_n: usize,
    prediction: Option<RatePrediction>,
) -> Result<RateFit> {
    let window: Vec<&SweepPoint> = points.iter().filter(|pt| pt.n >= min_n).collect();
    if window.len() < 2 {
        return Err(OpaError::Argument(format!(
            "rate fit needs at least two points with n >= {min_n}"
        )));
    }
    if let Some(pt) = window.iter().find(|pt| !(pt.rate_value() > 0.0)) {
        return Err(OpaError::Argument(format!(
            "optimal norm at n = {} is not positive",
            pt.n
        )));
    }
    let ys: Vec<f64> = window.iter().map(|pt| pt.rate_value().ln()).collect();
    let xs: Vec<f64> = window
        .iter()
        .map(|pt| ((pt.n + pt.d + 1) as f64).ln())
        .collect();
    let (fitted_exponent, r_squared) = least_squares_slope(&xs, &ys);
    let (fitted_log_exponent, band_ratio) = match prediction.map(|p| p.regime) {
        Some(Regime::LogDecay { log_exponent }) => {
            let lx: Vec<f64> = window
                .iter()
                .map(|pt| ((pt.n + pt.d + 2) as f64).ln().ln())
                .collect();
            let normalized: Vec<f64> = window
                .iter()
                .map(|pt| pt.rate_value() / ((pt.n + pt.d + 2) as f64).ln().powf(log_exponent))
                .collect();
            let hi = normalized.iter().copied().fold(0.0, f64::max);
            let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
            (Some(least_squares_slope(&lx, &ys).0), Some(hi / lo))
        }
        _ => (None, None),
    };
    Ok(RateFit {
        samples: window
            .iter()
            .map(|pt| (pt.n, pt.result.optimal_norm))
            .collect(),
        fitted_exponent,
        fitted_log_exponent,
        r_squared,
        band_ratio,
        floor: window
            .iter()
            .map(|pt| pt.rate_value())
            .fold(f64::INFINITY, f64::min),
        prediction,
    })
}

/// Slope and coefficient of determination of the least-squares line.
fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r2)
}

/// Runs the sweep and fits its rate. Any non-converged point is an error
/// listing the failing degrees.
pub fn sweep_and_fit(
    problem: &SweepProblem,
    sp: &SpaceParams,
    grid: &[usize],
    choice: SweepSolver,
    opts: &SolverOpts,
    min_n: usize,
) -> Result<(Vec<SweepPoint>, RateFit)> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OpaError::Argument(
            "degree grid must be strictly increasing".into(),
        ));
    }
    let points = run_sweep(problem, sp, grid, choice, opts)?;
    let failed: Vec<usize> = points
        .iter()
        .filter(|pt| !pt.result.converged)
        .map(|pt| pt.n)
        .collect();
    if !failed.is_empty() {
        return Err(OpaError::Sweep(failed));
    }
    let prediction = sp.weight().alpha().map(|alpha| classify(sp.p(), alpha));
    let fit = fit_rate(&points, min_n, prediction)?;
    Ok((points, fit))
}

#[derive(Debug, Serialize)]
struct CsvRow {
    n: usize,
    d: usize,
    p: String,
    alpha: String,
    optimal_norm: String,
    norm_p_power: String,
    lower_bound: String,
    predicted_value: String,
    solver: &'static str,
    converged: bool,
    iterations: usize,
    wall_ms: String,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the sweep as CSV. `wall_ms` is reported as `0` unless `timing`
/// is set, so that identical runs give identical bytes.
pub fn write_csv<W: Write>(
    points: &[SweepPoint],
    sp: &SpaceParams,
    timing: bool,
    out: W,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let alpha = sp
        .weight()
        .alpha()
        .map(|a| a.to_string())
        .unwrap_or_default();
    for pt in points {
        writer
            .serialize(CsvRow {
                n: pt.n,
                d: pt.d,
                p: sp.p().to_string(),
                alpha: alpha.clone(),
                optimal_norm: num(pt.result.optimal_norm),
                norm_p_power: num(pt.result.norm_p_power()),
                lower_bound: pt.lower_bound.map(num).unwrap_or_default(),
                predicted_value: pt.predicted_value.map(num).unwrap_or_default(),
                solver: pt.result.solver.name(),
                converged: pt.result.converged,
                iterations: pt.result.iterations,
                wall_ms: if timing {
                    format!("{:.3}", pt.wall_ms)
                } else {
                    "0".into()
                },
            })
            .map_err(|e| OpaError::Argument(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| OpaError::Argument(format!("csv write failed: {e}")))?;
    Ok(())
}
