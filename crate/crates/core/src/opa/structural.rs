//! The residual `1 - p_n f` through the zeros of `f`.
//!
//! Writing `d_t = (1 - p_n f)^(t)^<p-1> w_t`, orthogonality to `z^j f` is
//! the recurrence `sum_k a_k d_{k+j} = 0`, so `d_t` is an exponential
//! polynomial `sum_{i,j} A_{ij} t^{j-1} z_i^t` in the zeros `z_i` of `f`.
//! The `deg f` constants are pinned down by requiring that the residual
//! equals one at each zero and that its derivatives vanish there up to the
//! multiplicity.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::hilbert::hilbert_coefficients;
use super::{assemble, residual_of, solve_convex, OpaResult, SolverKind, SolverOpts};
use crate::error::{OpaError, Result};
use crate::linalg::{least_squares_complex, solve_dense};
use crate::poly::{signed_power, CircleZeroSpec, Poly, DEFAULT_DIV_TOL};
use crate::space::SpaceParams;

const MODULUS_FLOOR: f64 = 1e-30;
const NEWTON_ITERS: usize = 200;

/// Constants `A_{i,j,n}` of the exponential-polynomial form of `d_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyFit {
    /// Keyed by `(root index i, power j)` with `j >= 1`, both as in
    /// `A_{ij} t^{j-1} z_i^t`; `i` is zero-based.
    pub constants: BTreeMap<(usize, usize), Complex64>,
    /// `max_t |d_t - sum A_{ij} t^{j-1} z_i^t|` over `0 <= t <= n+d`.
    pub fit_residual: f64,
    /// Largest violation of the interpolation system.
    pub system_residual: f64,
}

impl ExpPolyFit {
    /// `sum_i A_{i,1}`; for simple zeros this equals `||1 - p_n f||^p`.
    pub fn constant_sum(&self) -> Complex64 {
        self.constants
            .iter()
            .filter(|((_, j), _)| *j == 1)
            .map(|(_, a)| *a)
            .sum()
    }
}

/// Basis and equations in the scaled variable `tau = t / T`, `T = n + d`,
/// which keeps the polynomial factors of order one.
struct System {
    points: Vec<Complex64>,
    mults: Vec<u32>,
    len: usize,
    scale: f64,
    weights: Vec<f64>,
    q: f64,
    /// `basis[k][t] = tau^{j-1} z_i^t` for the `k`-th `(i, j)` pair.
    basis: Vec<Vec<Complex64>>,
    keys: Vec<(usize, usize)>,
    /// `tests[e][t] = tau^s z_l^t` for the `e`-th `(l, s)` pair.
    tests: Vec<Vec<Complex64>>,
    targets: Vec<Complex64>,
}

impl System {
    fn new(spec: &CircleZeroSpec, n: usize, sp: &SpaceParams) -> Result<System> {
        let p = sp.smooth_p()?;
        let q = p / (p - 1.0);
        let d = spec.degree();
        let len = n + d + 1;
        let scale = (n + d).max(1) as f64;
        let points = spec.points();
        let mults = spec.multiplicities();
        let powers: Vec<Vec<Complex64>> = points
            .iter()
            .map(|z| {
                let mut acc = Complex64::new(1.0, 0.0);
                (0..len)
                    .map(|_| {
                        let v = acc;
                        acc *= z;
                        v
                    })
                    .collect()
            })
            .collect();
        let tau_pow = |t: usize, e: u32| (t as f64 / scale).powi(e as i32);
        let mut basis = Vec::with_capacity(d);
        let mut keys = Vec::with_capacity(d);
        let mut tests = Vec::with_capacity(d);
        let mut targets = Vec::with_capacity(d);
        for (i, &b) in mults.iter().enumerate() {
            for j in 1..=b {
                keys.push((i, j as usize));
                basis.push((0..len).map(|t| powers[i][t] * tau_pow(t, j - 1)).collect());
            }
            for s in 0..b {
                tests.push((0..len).map(|t| powers[i][t] * tau_pow(t, s)).collect());
                targets.push(Complex64::new(if s == 0 { 1.0 } else { 0.0 }, 0.0));
            }
        }
        Ok(System {
            points,
            mults,
            len,
            scale,
            weights: sp.weight().values(len),
            q,
            basis,
            keys,
            tests,
            targets,
        })
    }

    fn dual(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        (0..self.len)
            .map(|t| coeffs.iter().zip(&self.basis).map(|(a, b)| a * b[t]).sum())
            .collect()
    }

    /// `B_t = (d_t / w_t)^<q-1>`
    fn residual_coeffs(&self, dual: &[Complex64]) -> Vec<Complex64> {
        dual.iter()
            .zip(&self.weights)
            .map(|(d, w)| signed_power(d / w, self.q - 1.0))
            .collect()
    }

    fn equations(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let b = self.residual_coeffs(&self.dual(coeffs));
        self.tests
            .iter()
            .zip(&self.targets)
            .map(|(v, target)| v.iter().zip(&b).map(|(x, y)| x * y).sum::<Complex64>() - target)
            .collect()
    }

    /// Real Jacobian of the equations in `(re A_k, im A_k)`, row-major.
    ///
    /// With `h(u) = u^<s>`, `dh = h_u du + h_ubar conj(du)` where
    /// `h_u = (s-1)/2 |u|^{s-3} conj(u)^2` and `h_ubar = (s+1)/2 |u|^{s-1}`.
    fn jacobian(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let dim = coeffs.len();
        let s = self.q - 1.0;
        let dual = self.dual(coeffs);
        let mut hu = Vec::with_capacity(self.len);
        let mut hubar = Vec::with_capacity(self.len);
        for (d, w) in dual.iter().zip(&self.weights) {
            let u = d / w;
            let m = u.norm().max(MODULUS_FLOOR);
            hu.push(u.conj() * u.conj() * ((s - 1.0) / 2.0 * m.powf(s - 3.0)) / w);
            hubar.push((s + 1.0) / 2.0 * m.powf(s - 1.0) / w);
        }
        let mut jac = vec![0.0; 4 * dim * dim];
        for (e, v) in self.tests.iter().enumerate() {
            for (k, phi) in self.basis.iter().enumerate() {
                let mut pk = Complex64::new(0.0, 0.0);
                let mut qk = Complex64::new(0.0, 0.0);
                for t in 0..self.len {
                    pk += v[t] * hu[t] * phi[t];
                    qk += v[t] * hubar[t] * phi[t].conj();
                }
                let (sum, diff) = (pk + qk, pk - qk);
                let row = 2 * e;
                let col = 2 * k;
                jac[row * 2 * dim + col] = sum.re;
                jac[row * 2 * dim + col + 1] = -diff.im;
                jac[(row + 1) * 2 * dim + col] = sum.im;
                jac[(row + 1) * 2 * dim + col + 1] = diff.re;
            }
        }
        jac
    }

    /// Scaled constants back to `A_{ij}` multiplying `t^{j-1}`.
    fn unscale(&self, coeffs: &[Complex64]) -> BTreeMap<(usize, usize), Complex64> {
        self.keys
            .iter()
            .zip(coeffs)
            .map(|(&(i, j), a)| ((i, j), a / self.scale.powi(j as i32 - 1)))
            .collect()
    }

    fn fit(&self, residual: &[Complex64]) -> Option<Vec<Complex64>> {
        let dual = dual_from_residual(residual, self.len, self.q, &self.weights);
        least_squares_complex(&self.basis, &dual)
    }

    fn fit_residual(&self, residual: &[Complex64], coeffs: &[Complex64]) -> f64 {
        let observed = dual_from_residual(residual, self.len, self.q, &self.weights);
        self.dual(coeffs)
            .iter()
            .zip(&observed)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `d_t = r_t^<p-1> w_t` for `t < len`.
fn dual_from_residual(
    residual: &[Complex64],
    len: usize,
    q: f64,
    weights: &[f64],
) -> Vec<Complex64> {
    let p = q / (q - 1.0);
    (0..len)
        .map(|t| signed_power(residual.get(t).copied().unwrap_or_default(), p - 1.0) * weights[t])
        .collect()
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Damped Newton on the interpolation system; returns the final scaled
/// constants, iteration count and residual.
fn newton(system: &System, mut coeffs: Vec<Complex64>, tol: f64) -> (Vec<Complex64>, usize, f64) {
    let dim = coeffs.len();
    let mut f = system.equations(&coeffs);
    let mut merit = sup(&f);
    let mut iterations = 0;
    while iterations < NEWTON_ITERS {
        if merit <= tol * 1e-4 {
            break;
        }
        let jac = system.jacobian(&coeffs);
        let rhs: Vec<f64> = f.iter().flat_map(|v| [-v.re, -v.im]).collect();
        let Some(step) = solve_dense(jac, rhs) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<Complex64> = (0..dim)
                .map(|k| coeffs[k] + lambda * Complex64::new(step[2 * k], step[2 * k + 1]))
                .collect();
            let tf = system.equations(&trial);
            let tm = sup(&tf);
            if tm.is_finite() && tm < merit {
                coeffs = trial;
                f = tf;
                merit = tm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    (coeffs, iterations, merit)
}

/// Fits `A_{ij}` to the residual of a computed approximant and evaluates
/// the system at the fitted constants.
pub fn fit_exp_poly(
    residual: &Poly,
    spec: &CircleZeroSpec,
    n: usize,
    sp: &SpaceParams,
) -> Result<ExpPolyFit> {
    let system = System::new(spec, n, sp)?;
    let coeffs = system
        .fit(residual.coeffs())
        .ok_or_else(|| OpaError::Internal("exponential-polynomial fit is singular".into()))?;
    Ok(ExpPolyFit {
        fit_residual: system.fit_residual(residual.coeffs(), &coeffs),
        system_residual: sup(&system.equations(&coeffs)),
        constants: system.unscale(&coeffs),
    })
}

/// Solves for the constants `A_{ij}` by damped Newton, then rebuilds the
/// residual and divides `1 - residual` by `f`.
///
/// The starting point is fitted from `init` when given, otherwise from the
/// Hilbert approximant in the weight `w^{1/(p-1)}`. If Newton stalls above
/// `opts.system_tol`, constants fitted to [`solve_convex`] are used instead.
pub fn solve_structural(
    spec: &CircleZeroSpec,
    n: usize,
    sp: &SpaceParams,
    init: Option<&OpaResult>,
    opts: &SolverOpts,
) -> Result<(OpaResult, ExpPolyFit)> {
    let p = sp.smooth_p()?;
    let system = System::new(spec, n, sp)?;
    let f = spec.expand();

    let start_residual = match init {
        Some(r) => r.residual.clone(),
        None => {
            let warm = hilbert_coefficients(&f, n, &sp.weight().powered(1.0 / (p - 1.0))?)?;
            residual_of(&warm, &f)
        }
    };
    let start = system
        .fit(start_residual.coeffs())
        .ok_or_else(|| OpaError::Internal("exponential-polynomial fit is singular".into()))?;
    let (mut coeffs, mut iterations, mut merit) = newton(&system, start, opts.system_tol);

    if merit > opts.system_tol {
        log::debug!("structural newton stalled at {merit:e}; refitting from convex solve");
        let oracle = solve_convex(&f, n, sp, opts)?;
        if let Some(fitted) = system.fit(oracle.residual.coeffs()) {
            let (polished, extra, m) = newton(&system, fitted, opts.system_tol);
            iterations += oracle.iterations + extra;
            if m < merit {
                coeffs = polished;
                merit = m;
            }
        }
    }

    let b = system.residual_coeffs(&system.dual(&coeffs));
    let residual = Poly::new(b);
    let numerator = &Poly::one() - &residual;
    let division = numerator
        .exact_div(&f, DEFAULT_DIV_TOL)
        .map_err(|e| OpaError::Internal(format!("structural residual not divisible by f: {e}")))?;
    let converged = merit <= opts.system_tol;
    let result = assemble(
        &f,
        division.quotient,
        n,
        sp,
        iterations,
        converged,
        SolverKind::Structural,
    );
    let fit = ExpPolyFit {
        fit_residual: system.fit_residual(result.residual.coeffs(), &coeffs),
        system_residual: merit,
        constants: system.unscale(&coeffs),
    };
    debug_assert_eq!(system.points.len(), system.mults.len());
    Ok((result, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_z_hardy() {
        let spec = CircleZeroSpec::parse_roots("0:1")
            .unwrap()
            .normalized_at_origin();
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let (res, fit) = solve_structural(&spec, 1, &sp, None, &SolverOpts::default()).unwrap();
        assert_eq!(fit.constants.len(), 1);
        let a = fit.constants[&(0, 1)];
        assert!((a - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((res.optimal_norm.powi(2) - 1.0 / 3.0).abs() < 1e-12);
        assert!(res.converged);
    }

    #[test]
    fn double_root_matches_convex() {
        let spec = CircleZeroSpec::parse_roots("0:2").unwrap();
        let sp = SpaceParams::power(3.0, 0.0).unwrap();
        let opts = SolverOpts::default();
        let (res, fit) = solve_structural(&spec, 8, &sp, None, &opts).unwrap();
        let oracle = solve_convex(&spec.expand(), 8, &sp, &opts).unwrap();
        assert!((&res.residual - &oracle.residual).sup_norm() < 1e-6);
        assert_eq!(fit.constants.len(), 2);
        assert!(fit.fit_residual <= 1e-6);
        assert!(fit.system_residual <= 1e-9);
    }

    #[test]
    fn simple_zero_identity() {
        let spec = CircleZeroSpec::parse_roots("pi/3:1,pi:1,3pi/2:1").unwrap();
        let sp = SpaceParams::power(1.5, 0.0).unwrap();
        let (res, fit) = solve_structural(&spec, 10, &sp, None, &SolverOpts::default()).unwrap();
        let sum = fit.constant_sum();
        let np = res.norm_p_power();
        assert!((sum.re - np).abs() <= 1e-8 * np, "{sum} vs {np}");
        assert!(sum.im.abs() <= 1e-9);
    }

    #[test]
    fn fit_of_convex_solution() {
        let spec = CircleZeroSpec::parse_roots("0:1,pi:1").unwrap();
        let sp = SpaceParams::power(3.0, 0.5).unwrap();
        let oracle = solve_convex(&spec.expand(), 12, &sp, &SolverOpts::default()).unwrap();
        let fit = fit_exp_poly(&oracle.residual, &spec, 12, &sp).unwrap();
        assert!(fit.fit_residual < 1e-8);
        assert!(fit.system_residual < 1e-7);
    }
}
