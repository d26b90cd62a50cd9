//! Approximants at the flat exponents `p = 1` and `p = inf`.
//!
//! Both objectives are nonsmooth and their minimizers need not be unique.
//! They are handled as second-order cone programs by a log-barrier
//! interior-point method:
//!
//! * `p = 1`: `min sum w_t s_t` subject to `|r_t| <= s_t`. The slack `s_t` is
//!   eliminated analytically, leaving a smooth strictly convex barrier in the
//!   coefficients of `P`.
//! * `p = inf`: `min s` subject to `w_t |r_t| <= s`. The shared slack couples
//!   to every coefficient, so the Newton system is an arrow matrix solved by
//!   a Schur complement on top of banded Cholesky.
//!
//! With `N` residual terms each barrier has parameter `2N`, so a centered
//! point at barrier weight `tau` is within `2N / tau` of the optimal value.
//! Barrier iterates track the analytic center of the optimal face, which is
//! what makes the flatness probes meaningful.

use num_complex::Complex64;

use super::{assemble, require_nonzero, OpaResult, SolverKind, SolverOpts};
use crate::error::{OpaError, Result};
use crate::linalg::BandedHermitian;
use crate::poly::Poly;
use crate::space::{Exponent, SpaceParams};

const TAU_GROWTH: f64 = 10.0;
const CENTERING_TOL: f64 = 1e-10;
/// Probes reaching further than this mark the minimizer as non-unique.
/// Directions in which the objective grows quadratically (tangential moves
/// of a nonzero residual) stay within the probe tolerance for a distance of
/// order `sqrt(tol)`, well below this.
pub const FLAT_EXTENT: f64 = 0.05;
const PROBE_MAX: f64 = 1e3;

/// Extent of the near-optimal set along one real coordinate of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatProbe {
    /// Index of the perturbed coefficient of `P`.
    pub coefficient: usize,
    /// Whether the imaginary part (rather than the real part) was perturbed.
    pub imaginary: bool,
    /// Largest `h >= 0` found with the objective at `-h` within tolerance.
    pub lower: f64,
    /// Largest `h >= 0` found with the objective at `+h` within tolerance.
    pub upper: f64,
}

impl FlatProbe {
    pub fn extent(&self) -> f64 {
        self.lower + self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatDiagnostics {
    /// Objective at the returned approximant: `sum w_t |r_t|` or
    /// `max w_t |r_t|`.
    pub optimal_value: f64,
    /// Certified bound `2N / tau` on the optimality gap of the last
    /// centered barrier iterate.
    pub gap_bound: f64,
    pub barrier_stages: usize,
    /// Objective tolerance used by the probes.
    pub probe_tol: f64,
    pub probes: Vec<FlatProbe>,
    pub non_unique: bool,
}

impl FlatDiagnostics {
    /// Probes whose extent exceeds [`FLAT_EXTENT`].
    pub fn flat_directions(&self) -> impl Iterator<Item = &FlatProbe> {
        self.probes.iter().filter(|p| p.extent() > FLAT_EXTENT)
    }
}

/// Minimizes `||1 - Pf||` over `deg P <= n` at `p = 1` or `p = inf`.
///
/// Returns one minimizer together with a flatness report. The result is
/// marked converged when every barrier stage was centered and the duality
/// gap bound is at most `opts.flat_tol`.
pub fn solve_flat(
    f: &Poly,
    n: usize,
    sp: &SpaceParams,
    opts: &SolverOpts,
) -> Result<(OpaResult, FlatDiagnostics)> {
    let d = require_nonzero(f)?;
    let mode = match sp.p() {
        Exponent::Finite(1.0) => Mode::Sum,
        Exponent::Infinity => Mode::Max,
        other => {
            return Err(OpaError::UnsupportedExponent(format!(
                "{other} (flat solver needs p = 1 or p = inf)"
            )))
        }
    };
    let problem = Flat {
        a: f.coeffs().to_vec(),
        n,
        d,
        weights: sp.weight().values(n + d + 1),
        mode,
    };
    let terms = (n + d + 1) as f64;
    let barrier_parameter = 2.0 * terms;

    let mut x = vec![0.0; 2 * (n + 1)];
    let mut slack = 2.0 * problem.objective(&problem.residual(&x)) + 1.0;
    let mut tau = barrier_parameter;
    let mut iterations = 0;
    let mut centered_all = true;
    let mut stages = 0;

    let gap_bound = if problem.objective(&problem.residual(&x)) > 0.0 {
        loop {
            let outcome = match mode {
                Mode::Sum => problem.center_sum(&mut x, tau, opts.max_iters - iterations),
                Mode::Max => {
                    problem.center_max(&mut x, &mut slack, tau, opts.max_iters - iterations)
                }
            };
            iterations += outcome.steps;
            stages += 1;
            centered_all &= outcome.centered;
            let gap_bound = barrier_parameter / tau;
            if gap_bound <= opts.flat_tol || iterations >= opts.max_iters {
                break gap_bound;
            }
            tau *= TAU_GROWTH;
        }
    } else {
        0.0
    };
    let converged = centered_all && gap_bound <= opts.flat_tol;

    let r = problem.residual(&x);
    let optimal_value = problem.objective(&r);
    let probe_tol = 10.0 * opts.flat_tol * optimal_value.max(1.0);
    let probes = problem.probes(&x, optimal_value, probe_tol);
    let non_unique = probes.iter().any(|p| p.extent() > FLAT_EXTENT);
    log::debug!(
        "flat n={n} {mode:?}: {iterations} newton steps over {stages} stages, value {optimal_value:e}, gap <= {gap_bound:e}"
    );

    let approximant = Poly::new(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    let result = assemble(
        f,
        approximant,
        n,
        sp,
        iterations,
        converged,
        SolverKind::Flat,
    );
    Ok((
        result,
        FlatDiagnostics {
            optimal_value,
            gap_bound,
            barrier_stages: stages,
            probe_tol,
            probes,
            non_unique,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Sum,
    Max,
}

struct Flat {
    a: Vec<Complex64>,
    n: usize,
    d: usize,
    weights: Vec<f64>,
    mode: Mode,
}

struct Centering {
    steps: usize,
    centered: bool,
}

impl Flat {
    fn residual(&self, x: &[f64]) -> Vec<Complex64> {
        let mut r = vec![Complex64::new(0.0, 0.0); self.n + self.d + 1];
        r[0] = Complex64::new(1.0, 0.0);
        for j in 0..=self.n {
            let c = Complex64::new(x[2 * j], x[2 * j + 1]);
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for (k, a) in self.a.iter().enumerate() {
                r[j + k] -= c * a;
            }
        }
        r
    }

    fn objective(&self, r: &[Complex64]) -> f64 {
        let terms = r.iter().zip(&self.weights).map(|(v, w)| v.norm() * w);
        match self.mode {
            Mode::Sum => terms.sum(),
            Mode::Max => terms.fold(0.0, f64::max),
        }
    }

    fn locals(&self, t: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = t.saturating_sub(self.d);
        let hi = t.min(self.n);
        (lo..=hi).flat_map(move |j| {
            let e = -self.a[t - j];
            [(2 * j, e), (2 * j + 1, Complex64::new(0.0, 1.0) * e)]
        })
    }

    fn dim(&self) -> usize {
        2 * (self.n + 1)
    }

    /// `sum_t psi_t(|r_t|)` where `psi(m) = min_s (a s - ln(s^2 - m^2))`,
    /// `a = tau w_t`. The minimizing slack is `s* = (1 + R)/a` with
    /// `R = sqrt(1 + a^2 m^2)`, and `s*^2 - m^2 = 2 s*/a`.
    fn sum_barrier(&self, r: &[Complex64], tau: f64) -> f64 {
        r.iter()
            .zip(&self.weights)
            .map(|(v, w)| {
                let a = tau * w;
                let big_r = 1.0f64.hypot(a * v.norm());
                (1.0 + big_r) - (2.0 * (1.0 + big_r) / (a * a)).ln()
            })
            .sum()
    }

    fn sum_derivatives(&self, r: &[Complex64], tau: f64) -> (Vec<f64>, BandedHermitian<f64>) {
        let mut g = vec![0.0; self.dim()];
        let mut h = BandedHermitian::<f64>::zeros(self.dim(), 2 * self.d + 1);
        for (t, rt) in r.iter().enumerate() {
            let a = tau * self.weights[t];
            let m = rt.norm();
            let big_r = 1.0f64.hypot(a * m);
            // psi'(m)/m and psi''(m) / (psi'(m)/m) = 1/R
            let factor = a * a / (1.0 + big_r);
            let kappa = 1.0 / big_r - 1.0;
            let u = if m > 0.0 {
                rt / m
            } else {
                Complex64::new(0.0, 0.0)
            };
            let locals: Vec<(usize, Complex64)> = self.locals(t).collect();
            for (ia, &(ra, ea)) in locals.iter().enumerate() {
                g[ra] += factor * (rt.conj() * ea).re;
                let pa = (u.conj() * ea).re;
                for &(rb, eb) in &locals[..=ia] {
                    let pb = (u.conj() * eb).re;
                    h.add_lower(ra, rb, factor * ((ea.conj() * eb).re + kappa * pa * pb));
                }
            }
        }
        (g, h)
    }

    fn center_sum(&self, x: &mut Vec<f64>, tau: f64, budget: usize) -> Centering {
        let mut steps = 0;
        let mut r = self.residual(x);
        let mut value = self.sum_barrier(&r, tau);
        while steps < budget {
            let (g, h) = self.sum_derivatives(&r, tau);
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(dx) = solve_shifted(&h, &neg) else {
                return Centering {
                    steps,
                    centered: false,
                };
            };
            let decrement: f64 = -g.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
            if decrement <= CENTERING_TOL || resolution_limited(decrement, value) {
                return Centering {
                    steps,
                    centered: true,
                };
            }
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + step * b).collect();
                let tr = self.residual(&trial);
                let tv = self.sum_barrier(&tr, tau);
                if tv <= value - 0.25 * step * decrement {
                    *x = trial;
                    r = tr;
                    value = tv;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            steps += 1;
            if !accepted {
                return Centering {
                    steps,
                    centered: resolution_limited(decrement, value),
                };
            }
        }
        Centering {
            steps,
            centered: false,
        }
    }

    /// `tau s - sum_t ln(s^2 - w_t^2 |r_t|^2)`, or `None` outside the cone.
    fn max_barrier(&self, r: &[Complex64], s: f64, tau: f64) -> Option<f64> {
        let mut acc = tau * s;
        for (v, w) in r.iter().zip(&self.weights) {
            let wm = w * v.norm();
            if !(s - wm > 0.0) {
                return None;
            }
            acc -= ((s - wm) * (s + wm)).ln();
        }
        Some(acc)
    }

    fn center_max(&self, x: &mut Vec<f64>, s: &mut f64, tau: f64, budget: usize) -> Centering {
        let dim = self.dim();
        let mut steps = 0;
        let mut r = self.residual(x);
        let Some(mut value) = self.max_barrier(&r, *s, tau) else {
            return Centering {
                steps,
                centered: false,
            };
        };
        while steps < budget {
            let mut gx = vec![0.0; dim];
            let mut gs = tau;
            let mut hxx = BandedHermitian::<f64>::zeros(dim, 2 * self.d + 1);
            let mut hxs = vec![0.0; dim];
            let mut hss = 0.0;
            for (t, rt) in r.iter().enumerate() {
                let w2 = self.weights[t] * self.weights[t];
                let big_d = *s * *s - w2 * rt.norm_sqr();
                let tangential = 2.0 * w2 / big_d;
                let radial = 4.0 * w2 * w2 / (big_d * big_d);
                gs -= 2.0 * *s / big_d;
                hss += -2.0 / big_d + 4.0 * *s * *s / (big_d * big_d);
                let locals: Vec<(usize, Complex64)> = self.locals(t).collect();
                for (ia, &(ra, ea)) in locals.iter().enumerate() {
                    let qa = (rt.conj() * ea).re;
                    gx[ra] += tangential * qa;
                    hxs[ra] -= 4.0 * *s * w2 / (big_d * big_d) * qa;
                    for &(rb, eb) in &locals[..=ia] {
                        let qb = (rt.conj() * eb).re;
                        hxx.add_lower(ra, rb, tangential * (ea.conj() * eb).re + radial * qa * qb);
                    }
                }
            }
            let Some(chol) = hxx.cholesky() else {
                return Centering {
                    steps,
                    centered: false,
                };
            };
            let y1 = chol.solve(&gx);
            let y2 = chol.solve(&hxs);
            let schur = hss - dot(&hxs, &y2);
            if !(schur > 0.0) {
                return Centering {
                    steps,
                    centered: false,
                };
            }
            let ds = (-gs + dot(&hxs, &y1)) / schur;
            let dx: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| -a - b * ds).collect();
            let decrement = -(dot(&gx, &dx) + gs * ds);
            if decrement <= CENTERING_TOL || resolution_limited(decrement, value) {
                return Centering {
                    steps,
                    centered: true,
                };
            }
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + step * b).collect();
                let ts = *s + step * ds;
                let tr = self.residual(&trial);
                if let Some(tv) = self.max_barrier(&tr, ts, tau) {
                    if tv <= value - 0.25 * step * decrement {
                        *x = trial;
                        *s = ts;
                        r = tr;
                        value = tv;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            steps += 1;
            if !accepted {
                return Centering {
                    steps,
                    centered: resolution_limited(decrement, value),
                };
            }
        }
        Centering {
            steps,
            centered: false,
        }
    }

    fn probes(&self, x: &[f64], value: f64, tol: f64) -> Vec<FlatProbe> {
        let within = |idx: usize, h: f64| {
            let mut y = x.to_vec();
            y[idx] += h;
            (self.objective(&self.residual(&y)) - value).abs() <= tol
        };
        let reach = |idx: usize, sign: f64| {
            let mut good = 0.0;
            let mut bad = 1e-4;
            while bad <= PROBE_MAX && within(idx, sign * bad) {
                good = bad;
                bad *= 2.0;
            }
            if bad > PROBE_MAX {
                return good;
            }
            for _ in 0..30 {
                let mid = 0.5 * (good + bad);
                if within(idx, sign * mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        (0..self.dim())
            .map(|idx| FlatProbe {
                coefficient: idx / 2,
                imaginary: idx % 2 == 1,
                lower: reach(idx, -1.0),
                upper: reach(idx, 1.0),
            })
            .collect()
    }
}

/// A Newton decrement this small cannot be resolved against a barrier value
/// of this size in double precision.
fn resolution_limited(decrement: f64, value: f64) -> bool {
    decrement <= 1e-12 * value.abs().max(1.0)
}

fn solve_shifted(h: &BandedHermitian<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let mut mu = h.max_diagonal() * 1e-15;
    for _ in 0..8 {
        let mut shifted = h.clone();
        shifted.add_diagonal(mu);
        if let Some(chol) = shifted.cholesky() {
            return Some(chol.solve(rhs));
        }
        mu = (mu * 100.0).max(f64::MIN_POSITIVE);
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
