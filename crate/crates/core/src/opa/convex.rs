use num_complex::Complex64;

use super::hilbert::hilbert_coefficients;
use super::{assemble, require_nonzero, OpaResult, SolverKind, SolverOpts};
use crate::error::Result;
use crate::linalg::BandedHermitian;
use crate::poly::Poly;
use crate::space::{norm, SpaceParams};

/// Residual moduli at or below this are treated as zero in the curvature
/// model.
const MODULUS_FLOOR: f64 = 1e-30;

/// A residual norm below `ZERO_NORM_FACTOR * grad_tol` counts as reaching a
/// zero optimum.
const ZERO_NORM_FACTOR: f64 = 1e-4;

/// Smoothing schedule for `p < 2`: `eps` starts at the largest residual
/// modulus, shrinks by `SMOOTHING_DECAY` per stage, and is dropped to zero
/// once below `SMOOTHING_END` times that start.
const SMOOTHING_DECAY: f64 = 0.1;
const SMOOTHING_END: f64 = 1e-10;
/// Scaled gradient at which a smoothed stage hands over to the next.
const STAGE_TOL: f64 = 1e-6;
const STAGE_ITERS: usize = 100;
/// Consecutive negligible steps without a decrease that end a stage.
const STALL_ITERS: usize = 3;
/// Relative improvement on the best `Phi` so far that counts as a decrease.
const STALL_PROGRESS: f64 = 1e-12;
/// Factor on the best scaled gradient so far that counts as a decrease.
const STALL_GRADIENT: f64 = 0.9;

/// Metric projection of `1` onto `P_n f` for `1 < p < inf`.
///
/// Minimizes `Phi(c) = sum_t |(1 - Pf)^(t)|^p w_t` over the real and
/// imaginary parts of the coefficients of `P` by damped Newton iteration with
/// an exact banded Hessian. Steps are accepted by Armijo backtracking, and
/// once decreases of `Phi` drop below rounding, by a decrease of the
/// gradient norm instead.
///
/// For `p < 2`, where `|r|^p` has unbounded curvature at `r = 0`, Newton
/// first follows the minimizers of `sum_t w_t (|r_t|^2 + eps^2)^{p/2}` for a
/// decreasing sequence of `eps`, finishing with `eps = 0`.
///
/// The result counts as converged when the scaled gradient reaches
/// `opts.grad_tol`, or, once Newton steps stall, when it is within the
/// change that rounding of the residual can cause. That second threshold
/// only matters for `p < 2` with residual entries near zero, where it is of
/// order `eps^{p-1}`.
pub fn solve_convex(f: &Poly, n: usize, sp: &SpaceParams, opts: &SolverOpts) -> Result<OpaResult> {
    let p = sp.smooth_p()?;
    let d = require_nonzero(f)?;
    let mut problem = Problem {
        a: f.coeffs().to_vec(),
        n,
        d,
        p,
        weights: sp.weight().values(n + d + 1),
        eps2: 0.0,
    };
    let f_norm = norm(f, sp);

    let mut x = vec![0.0; 2 * (n + 1)];
    if opts.warm_start {
        let warm_weight = sp.weight().powered(1.0 / (p - 1.0))?;
        if let Ok(warm) = hilbert_coefficients(f, n, &warm_weight) {
            for (j, c) in warm.coeffs().iter().enumerate() {
                x[2 * j] = c.re;
                x[2 * j + 1] = c.im;
            }
        }
    }

    let start_scale = problem
        .residual(&x)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    let mut eps = if p < 2.0 { start_scale } else { 0.0 };
    let mut iterations = 0;
    let (converged, phi) = loop {
        problem.eps2 = eps * eps;
        let last = eps == 0.0;
        let budget = if last {
            opts.max_iters - iterations.min(opts.max_iters)
        } else {
            STAGE_ITERS
        };
        let tol = if last {
            opts.grad_tol
        } else {
            STAGE_TOL.max(opts.grad_tol)
        };
        let stage = problem.newton(&mut x, f_norm, tol, opts.step_tol, budget, last);
        iterations += stage.iterations;
        log::trace!(
            "convex stage eps={eps:e}: {} iterations, done={}",
            stage.iterations,
            stage.done
        );
        if last {
            break (stage.done, stage.phi);
        }
        eps *= SMOOTHING_DECAY;
        if eps < SMOOTHING_END * start_scale || iterations >= opts.max_iters {
            eps = 0.0;
        }
    };

    let approximant = Poly::new(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    log::debug!("convex n={n} p={p}: {iterations} iterations, converged={converged}, phi={phi:e}");
    Ok(assemble(
        f,
        approximant,
        n,
        sp,
        iterations,
        converged,
        SolverKind::Convex,
    ))
}

struct Stage {
    iterations: usize,
    done: bool,
    phi: f64,
}

/// Curvature model for a Newton step.
#[derive(Clone, Copy, PartialEq)]
enum Curvature {
    /// The Hessian of `Phi`.
    Exact,
    /// `w p |r|^{p-2}` in every direction of each residual entry. For
    /// `p < 2` this quadratic lies above `w |r|^p`, so its minimizer never
    /// increases `Phi`; exact Newton instead overshoots entries heading to
    /// zero by a factor `1/(p-1)`.
    Majorizing,
}

struct Problem {
    a: Vec<Complex64>,
    n: usize,
    d: usize,
    p: f64,
    weights: Vec<f64>,
    /// Squared smoothing parameter; zero for the exact objective.
    eps2: f64,
}

type StepOutcome = (f64, Vec<f64>, Vec<Complex64>, f64, Vec<f64>);

impl Problem {
    /// Damped Newton on the current objective from `x`. With `exact`, the
    /// stage ends on the full stopping rule (small scaled gradient and step,
    /// or a zero optimum); otherwise on a small scaled gradient alone.
    fn newton(
        &self,
        x: &mut Vec<f64>,
        f_norm: f64,
        tol: f64,
        step_tol: f64,
        budget: usize,
        exact: bool,
    ) -> Stage {
        let p = self.p;
        let mut r = self.residual(x);
        let mut phi = self.objective(&r);
        let mut grad = self.gradient(&r, x);
        let zero_optimum = |phi: f64| exact && phi.powf(1.0 / p) <= ZERO_NORM_FACTOR * tol;
        let mut iterations = 0;
        if zero_optimum(phi) || (!exact && self.scaled_gradient(&grad, phi, f_norm) <= tol) {
            return Stage {
                iterations,
                done: true,
                phi,
            };
        }
        let mut stalled = 0;
        let mut best = phi;
        let mut best_scaled = self.scaled_gradient(&grad, phi, f_norm);
        while iterations < budget {
            let mut direction = self.newton_direction(x, &r, &grad, Curvature::Exact);
            if p < 2.0 && !self.full_step_decreases(x, &direction, &grad, phi) {
                direction = self.newton_direction(x, &r, &grad, Curvature::Majorizing);
            }
            let slope: f64 = grad.iter().zip(&direction).map(|(g, s)| g * s).sum();
            let at_floor = |x: &[f64], r: &[Complex64], grad: &[f64], phi: f64| {
                self.scaled_gradient(grad, phi, f_norm)
                    <= tol.max(self.gradient_floor(x, r, phi, f_norm))
            };
            let Some((step, next_x, next_r, next_phi, next_grad)) =
                self.line_search(x, &direction, slope, phi, &grad)
            else {
                let done = at_floor(x, &r, &grad, phi);
                return Stage {
                    iterations,
                    done,
                    phi,
                };
            };
            iterations += 1;
            let step_size = direction
                .iter()
                .fold(0.0f64, |m, s| m.max((step * s).abs()));
            let scaled = self.scaled_gradient(&next_grad, next_phi, f_norm);
            // Rounding can make tiny steps cycle with alternating signs of the
            // change in Phi, while an entry converging to zero keeps shrinking
            // the gradient long after Phi stops resolving the decrease.
            let progress =
                next_phi < best * (1.0 - STALL_PROGRESS) || scaled < STALL_GRADIENT * best_scaled;
            stalled = if step_size <= step_tol && !progress {
                stalled + 1
            } else {
                0
            };
            best = best.min(next_phi);
            best_scaled = best_scaled.min(scaled);
            *x = next_x;
            r = next_r;
            phi = next_phi;
            grad = next_grad;
            log::trace!("convex iteration {iterations}: phi={phi:e} scaled_gradient={scaled:e} step={step_size:e}");
            let small = scaled <= tol && (!exact || step_size <= step_tol);
            // a zero optimum is reached without the gradient of the norm vanishing
            if small || zero_optimum(phi) {
                return Stage {
                    iterations,
                    done: true,
                    phi,
                };
            }
            if stalled >= STALL_ITERS {
                let done = at_floor(x, &r, &grad, phi);
                return Stage {
                    iterations,
                    done,
                    phi,
                };
            }
        }
        Stage {
            iterations,
            done: false,
            phi,
        }
    }

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
        let half = self.p / 2.0;
        r.iter()
            .zip(&self.weights)
            .map(|(v, w)| {
                let s = v.norm_sqr() + self.eps2;
                if s == 0.0 {
                    0.0
                } else {
                    s.powf(half) * w
                }
            })
            .sum()
    }

    /// Local variables touching residual `t`: `(real index, dr_t/dx)`.
    fn locals(&self, t: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = t.saturating_sub(self.d);
        let hi = t.min(self.n);
        (lo..=hi).flat_map(move |j| {
            let e = -self.a[t - j];
            [(2 * j, e), (2 * j + 1, Complex64::new(0.0, 1.0) * e)]
        })
    }

    /// Rounding error bound for each entry of [`Problem::residual`], taking
    /// every coefficient of `f` as known only to `eps * max_k |a_k|`.
    fn residual_noise(&self, x: &[f64]) -> Vec<f64> {
        let scale = 16.0 * (self.d + 2) as f64 * f64::EPSILON;
        let a_max = self.a.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        let mut noise = vec![0.0; self.n + self.d + 1];
        noise[0] = 1.0;
        for j in 0..=self.n {
            let c = Complex64::new(x[2 * j], x[2 * j + 1]).norm() * a_max;
            for v in &mut noise[j..=j + self.d] {
                *v += c;
            }
        }
        noise.iter_mut().for_each(|v| *v *= scale);
        noise
    }

    /// Entries within rounding of zero contribute nothing: the derivative
    /// of `|r|^p` vanishes at `r = 0`, while at `p < 2` evaluating it on
    /// rounding noise would leave a gradient floor of order `eps^{p-1}`.
    fn gradient(&self, r: &[Complex64], x: &[f64]) -> Vec<f64> {
        let noise = self.residual_noise(x);
        let mut g = vec![0.0; 2 * (self.n + 1)];
        for (t, rt) in r.iter().enumerate() {
            if rt.norm() <= noise[t] {
                continue;
            }
            let s = rt.norm_sqr() + self.eps2;
            // d/d(x, y) of w (|r|^2 + eps^2)^{p/2} is w p s^{p/2-1} (re r, im r)
            let gt = rt * (self.weights[t] * self.p * s.powf(self.p / 2.0 - 1.0));
            for (idx, e) in self.locals(t) {
                g[idx] += (gt.conj() * e).re;
            }
        }
        g
    }

    /// `||grad Phi||_inf / (p Phi^{(p-1)/p} ||f||)`: the gradient of the norm
    /// `Phi^{1/p}`, made scale-free in `f`.
    fn scaled_gradient(&self, grad: &[f64], phi: f64, f_norm: f64) -> f64 {
        if phi == 0.0 {
            return 0.0;
        }
        let g = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        g / (self.p * phi.powf((self.p - 1.0) / self.p) * f_norm)
    }

    /// The scaled gradient attainable in floating point: its largest
    /// change when every residual entry moves within its rounding bound.
    /// At `p < 2` entries near zero dominate, since `|r|^{p-1}` is only
    /// Hölder continuous there.
    fn gradient_floor(&self, x: &[f64], r: &[Complex64], phi: f64, f_norm: f64) -> f64 {
        let p = self.p;
        let noise = self.residual_noise(x);
        let sensitivity: Vec<f64> = r
            .iter()
            .zip(&noise)
            .zip(&self.weights)
            .map(|((rt, &e), w)| {
                let m = rt.norm();
                // r -> |r|^{p-2} r has derivative norm |r|^{p-2} for p < 2
                // and (p-1)|r|^{p-2} above; bound it over the rounding disc
                let change = if p < 2.0 {
                    let holder = 2f64.powf(2.0 - p) * e.powf(p - 1.0);
                    if m > e {
                        holder.min((m - e).powf(p - 2.0) * e)
                    } else {
                        holder
                    }
                } else {
                    (p - 1.0) * (m + e).powf(p - 2.0) * e
                };
                w * p * change
            })
            .collect();
        let a_abs: Vec<f64> = self.a.iter().map(|a| a.norm()).collect();
        let worst = (0..=self.n)
            .map(|j| {
                a_abs
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * sensitivity[j + k])
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max);
        self.scaled_gradient(&[worst], phi, f_norm)
    }

    fn full_step_decreases(&self, x: &[f64], direction: &[f64], grad: &[f64], phi: f64) -> bool {
        let slope: f64 = grad.iter().zip(direction).map(|(g, s)| g * s).sum();
        let nx: Vec<f64> = x.iter().zip(direction).map(|(a, s)| a + s).collect();
        let nphi = self.objective(&self.residual(&nx));
        slope < 0.0 && nphi <= phi + 1e-4 * slope
    }

    /// Entries within rounding of zero get the isotropic curvature of an
    /// entry at the rounding bound. For `p < 2` this caps the blow-up of
    /// `|r|^{p-2}`; for `p > 2` it keeps the Hessian away from singular
    /// when the optimal residual has entries below resolution.
    fn hessian(&self, x: &[f64], r: &[Complex64], curvature: Curvature) -> BandedHermitian<f64> {
        let dim = 2 * (self.n + 1);
        let mut h = BandedHermitian::<f64>::zeros(dim, 2 * self.d + 1);
        let p = self.p;
        let radial = if curvature == Curvature::Exact {
            p - 2.0
        } else {
            0.0
        };
        let noise = self.residual_noise(x);
        for (t, rt) in r.iter().enumerate() {
            let floor = MODULUS_FLOOR.max(noise[t]);
            let s = rt.norm_sqr() + self.eps2;
            // Hessian of w s^{p/2}: w p s^{p/2-1} (I + (p-2) r r^T / s)
            let (factor, v) = if s > floor * floor {
                (self.weights[t] * p * s.powf(p / 2.0 - 1.0), rt / s.sqrt())
            } else {
                (
                    self.weights[t] * p * floor.powf(p - 2.0),
                    Complex64::new(0.0, 0.0),
                )
            };
            let locals: Vec<(usize, Complex64)> = self.locals(t).collect();
            for (ia, &(ra, ea)) in locals.iter().enumerate() {
                let pa = (v.conj() * ea).re;
                for &(rb, eb) in &locals[..=ia] {
                    let pb = (v.conj() * eb).re;
                    let value = factor * ((ea.conj() * eb).re + radial * pa * pb);
                    h.add_lower(ra, rb, value);
                }
            }
        }
        h
    }

    /// Solves `H s = -g`, or `(H + mu I) s = -g` with `mu` raised until
    /// the factorization succeeds. Falls back to steepest descent.
    ///
    /// The shift is scaled by the smallest positive diagonal entry: at
    /// `p < 2` residual entries at zero carry a floor curvature many orders
    /// above the rest, and a shift relative to the largest entry would
    /// swamp the coordinates that are actually moving.
    fn newton_direction(
        &self,
        x: &[f64],
        r: &[Complex64],
        grad: &[f64],
        curvature: Curvature,
    ) -> Vec<f64> {
        let h = self.hessian(x, r, curvature);
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let solve = |m: &BandedHermitian<f64>| {
            m.cholesky()
                .map(|chol| chol.solve(&neg))
                .filter(|s| s.iter().all(|v| v.is_finite()))
        };
        if let Some(s) = solve(&h) {
            return s;
        }
        let scale = (0..h.size())
            .map(|i| h.get(i, i))
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        let mut mu = if scale.is_finite() {
            scale * 1e-12
        } else {
            1e-12
        };
        for _ in 0..12 {
            let mut shifted = h.clone();
            shifted.add_diagonal(mu);
            if let Some(s) = solve(&shifted) {
                return s;
            }
            mu *= 100.0;
        }
        neg
    }

    fn line_search(
        &self,
        x: &[f64],
        direction: &[f64],
        slope: f64,
        phi: f64,
        grad: &[f64],
    ) -> Option<StepOutcome> {
        let try_step = |step: f64| {
            let nx: Vec<f64> = x.iter().zip(direction).map(|(a, s)| a + step * s).collect();
            let nr = self.residual(&nx);
            let nphi = self.objective(&nr);
            (nx, nr, nphi)
        };
        if slope < 0.0 {
            let mut step = 1.0;
            for _ in 0..60 {
                let (nx, nr, nphi) = try_step(step);
                if nphi <= phi + 1e-4 * step * slope && nphi < phi {
                    let ng = self.gradient(&nr, &nx);
                    return Some((step, nx, nr, nphi, ng));
                }
                // the predicted decrease is below what Phi can resolve
                if -step * slope <= 1e-14 * phi {
                    break;
                }
                step *= 0.5;
            }
        }
        let g0 = l2(grad);
        let mut step = 1.0;
        for _ in 0..30 {
            let (nx, nr, nphi) = try_step(step);
            if nphi <= phi * (1.0 + 1e-13) {
                let ng = self.gradient(&nr, &nx);
                if l2(&ng) < g0 {
                    return Some((step, nx, nr, nphi, ng));
                }
            }
            step *= 0.5;
        }
        None
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opa::solve_hilbert;
    use crate::weights::Weight;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_one() {
        let sp = SpaceParams::power(3.0, 0.5).unwrap();
        for warm_start in [true, false] {
            let opts = SolverOpts {
                warm_start,
                ..Default::default()
            };
            let r = solve_convex(&Poly::one(), 4, &sp, &opts).unwrap();
            assert!((r.approximant.coeff(0) - c(1.0, 0.0)).norm() < 1e-12);
            assert!(r.optimal_norm < 1e-12);
            assert!(r.converged);
        }
    }

    #[test]
    fn pure_shift_stays_at_zero() {
        let f = Poly::from_real(&[0.0, 1.0]);
        for p in [1.5, 2.0, 3.0] {
            let sp = SpaceParams::power(p, 0.0).unwrap();
            let r = solve_convex(&f, 5, &sp, &SolverOpts::default()).unwrap();
            assert!(r.approximant.sup_norm() < 1e-12);
            assert!((r.optimal_norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_minus_z_hilbert_values() {
        let f = Poly::from_real(&[1.0, -1.0]);
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let opts = SolverOpts {
            warm_start: false,
            ..Default::default()
        };
        let r = solve_convex(&f, 1, &sp, &opts).unwrap();
        assert!((r.approximant.coeff(0) - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((r.approximant.coeff(1) - c(1.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((r.optimal_norm.powi(2) - 1.0 / 3.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn agrees_with_hilbert_at_p2() {
        let f = Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let opts = SolverOpts {
            warm_start: false,
            ..Default::default()
        };
        let a = solve_convex(&f, 2, &sp, &opts).unwrap();
        let b = solve_hilbert(&f, 2, &Weight::unit()).unwrap();
        assert!((&a.approximant - &b.approximant).sup_norm() < 1e-8);
    }

    #[test]
    fn cold_start_reaches_orthogonality() {
        let f = Poly::new(vec![c(1.0, 0.0), c(-0.5, 0.5), c(0.2, -0.1), c(0.0, 0.3)]);
        for p in [1.5, 3.0, 4.0] {
            let sp = SpaceParams::power(p, -0.5).unwrap();
            let opts = SolverOpts {
                warm_start: false,
                ..Default::default()
            };
            let r = solve_convex(&f, 7, &sp, &opts).unwrap();
            assert!(r.converged, "p={p}");
            assert!(
                r.ortho_residual_max.unwrap() < 1e-9,
                "p={p}: {:?}",
                r.ortho_residual_max
            );
        }
    }

    #[test]
    fn residuals_below_resolution_still_converge() {
        let cases = [
            // p > 2: optimal residual entries far below rounding
            (
                c(0.0, 0.028104879371298342),
                3.383930155654781,
                0.705972178462436,
                6,
            ),
            // p = 2: tiny steps cycling at the rounding floor
            (c(0.0, 0.1773282691800676), 2.0, -0.28339993209979747, 8),
            // p < 2: gradient still shrinking after Phi stops resolving
            (
                c(-0.4276289625914095, 0.2574556106089235),
                1.5210600827270044,
                -0.9023472461952661,
                5,
            ),
            (
                c(0.02326907276578119, 0.028104879371298342),
                1.401428824904765,
                0.705972178462436,
                2,
            ),
        ];
        for (a1, p, alpha, n) in cases {
            let f = Poly::new(vec![c(1.0, 0.0), a1]);
            let sp = SpaceParams::power(p, alpha).unwrap();
            let r = solve_convex(&f, n, &sp, &SolverOpts::default()).unwrap();
            assert!(r.converged, "p={p}, n={n}");
        }
    }
}
