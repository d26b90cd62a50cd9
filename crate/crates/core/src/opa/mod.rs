//! Optimal polynomial approximants to `1/f`.
//!
//! Several independent routes compute the same object: a generic convex
//! minimizer for `1 < p < inf`, the Hilbert normal equations at `p = 2`,
//! the structural system describing the residual through the zeros of `f`,
//! closed forms for `f = 1 - z^d`, and a barrier-method minimizer for the
//! flat exponents `p = 1` and `p = inf`. A composite construction built from
//! Hilbert approximants of the simple-zero part gives a near-optimal
//! competitor.

mod closed_form;
mod composite;
mod convex;
mod flat;
mod hilbert;
mod structural;

pub use closed_form::{closed_form_one_minus_zd, delta_powers, ClosedForm};
pub(crate) use closed_form::{detect_one_minus_zd, one_minus_zd};
pub use composite::{composite_construction, Composite};
pub use convex::solve_convex;
pub use flat::{solve_flat, FlatDiagnostics, FlatProbe, FLAT_EXTENT};
pub use hilbert::{solve_hilbert, solve_hilbert_in};
pub use structural::{fit_exp_poly, solve_structural, ExpPolyFit};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::OpaError;
use crate::poly::{signed_power, Poly};
use crate::space::{norm_coeffs, Exponent, SpaceParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOpts {
    /// Stop when the sup-norm of the gradient of `||1 - Pf||`, divided by
    /// `||f||`, is at most this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Optimality gap accepted by the flat-exponent minimizer.
    pub flat_tol: f64,
    /// Largest accepted violation of the structural system.
    pub system_tol: f64,
    /// Newton steps smaller than this (sup-norm) end the iteration.
    pub step_tol: f64,
    /// Start from the Hilbert approximant in the weight `w^{1/(p-1)}`
    /// instead of from `P = 0`.
    pub warm_start: bool,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts {
            grad_tol: 1e-10,
            max_iters: 10_000,
            flat_tol: 1e-6,
            system_tol: 1e-9,
            step_tol: 1e-12,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Convex,
    Hilbert,
    Structural,
    Flat,
    Closed,
    Composite,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Convex => "convex",
            SolverKind::Hilbert => "hilbert",
            SolverKind::Structural => "structural",
            SolverKind::Flat => "flat",
            SolverKind::Closed => "closed",
            SolverKind::Composite => "composite",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = OpaError;
    fn from_str(s: &str) -> Result<Self, OpaError> {
        Ok(match s {
            "convex" => SolverKind::Convex,
            "hilbert" => SolverKind::Hilbert,
            "structural" => SolverKind::Structural,
            "flat" => SolverKind::Flat,
            "closed" => SolverKind::Closed,
            "composite" => SolverKind::Composite,
            other => return Err(OpaError::Parse(format!("unknown solver {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpaResult {
    /// `p_n`
    pub approximant: Poly,
    /// `1 - p_n f`
    pub residual: Poly,
    /// `||1 - p_n f||_{p,w}`
    pub optimal_norm: f64,
    /// `max_j |bj(1 - p_n f, z^j f)|` over `j <= n` after normalizing both
    /// arguments; `None` for `p = 1, inf`.
    pub ortho_residual_max: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub solver: SolverKind,
    pub n: usize,
    pub p: Exponent,
}

impl OpaResult {
    /// `||1 - p_n f||^p`, or the norm itself at `p = inf`.
    pub fn norm_p_power(&self) -> f64 {
        match self.p {
            Exponent::Finite(p) => self.optimal_norm.powf(p),
            Exponent::Infinity => self.optimal_norm,
        }
    }
}

/// `1 - P f`
pub fn residual_of(approximant: &Poly, f: &Poly) -> Poly {
    &Poly::one() - &(approximant * f)
}

/// Builds a result from an approximant, recomputing every derived quantity.
pub(crate) fn assemble(
    f: &Poly,
    approximant: Poly,
    n: usize,
    sp: &SpaceParams,
    iterations: usize,
    converged: bool,
    solver: SolverKind,
) -> OpaResult {
    let residual = residual_of(&approximant, f);
    let optimal_norm = norm_coeffs(residual.coeffs(), sp);
    let ortho_residual_max = sp
        .smooth_p()
        .ok()
        .map(|p| ortho_residual_max(residual.coeffs(), f, n, p, sp));
    OpaResult {
        approximant,
        residual,
        optimal_norm,
        ortho_residual_max,
        iterations,
        converged,
        solver,
        n,
        p: sp.p(),
    }
}

/// `max_{j <= n} |sum_t r_t^<p-1> w_t a_{t-j}| / (||r||^{p-1} ||z^j f||)`.
pub(crate) fn ortho_residual_max(
    residual: &[Complex64],
    f: &Poly,
    n: usize,
    p: f64,
    sp: &SpaceParams,
) -> f64 {
    let w = sp.weight();
    let r_norm = norm_coeffs(residual, sp);
    if r_norm == 0.0 || f.is_zero() {
        return 0.0;
    }
    let a = f.coeffs();
    let dual: Vec<Complex64> = residual
        .iter()
        .enumerate()
        .map(|(t, r)| signed_power(*r, p - 1.0) * w.at(t))
        .collect();
    let scale = r_norm.powf(p - 1.0);
    (0..=n)
        .map(|j| {
            let s: Complex64 = a
                .iter()
                .enumerate()
                .filter_map(|(k, ak)| dual.get(k + j).map(|d| d * ak))
                .sum();
            let shifted_norm = a
                .iter()
                .enumerate()
                .map(|(k, ak)| ak.norm().powf(p) * w.at(k + j))
                .sum::<f64>()
                .powf(1.0 / p);
            s.norm() / (scale * shifted_norm)
        })
        .fold(0.0, f64::max)
}

/// Rejects the zero polynomial.
pub(crate) fn require_nonzero(f: &Poly) -> Result<usize, OpaError> {
    f.degree()
        .ok_or_else(|| OpaError::Argument("f must not be the zero polynomial".into()))
}
