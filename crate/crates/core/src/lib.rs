//! Optimal polynomial approximants to `1/f` in the weighted analytic
//! sequence spaces `l^p_A(w)`.
//!
//! For a polynomial `f` and a degree `n`, the optimal approximant `p_n`
//! minimizes `||1 - P f||_{p,w}` over all polynomials `P` of degree at most
//! `n`. The crate computes `p_n` by several independent methods (see
//! [`opa`]), checks the orthogonality conditions and norm inequalities they
//! satisfy, and measures how fast the optimal norm decays with `n` (see
//! [`rates`]).
//!
//! ```
//! use opa_core::{closed_form_one_minus_zd, solve_convex, Poly, SolverOpts, SpaceParams};
//!
//! let sp = SpaceParams::power(3.0, 0.0).unwrap();
//! let f = Poly::from_real(&[1.0, -1.0]);
//! let numeric = solve_convex(&f, 4, &sp, &SolverOpts::default()).unwrap();
//! let exact = closed_form_one_minus_zd(1, 4, &sp).unwrap();
//! assert!((&numeric.approximant - &exact.approximant).sup_norm() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod opa;
pub mod poly;
pub mod rates;
pub mod space;
pub mod verify;
pub mod weights;

pub use error::{OpaError, Result};
pub use opa::{
    closed_form_one_minus_zd, composite_construction, delta_powers, fit_exp_poly, residual_of,
    solve_convex, solve_flat, solve_hilbert, solve_hilbert_in, solve_structural, ClosedForm,
    Composite, ExpPolyFit, FlatDiagnostics, FlatProbe, OpaResult, SolverKind, SolverOpts,
};
pub use poly::{signed_power, Angle, CircleRoot, CircleZeroSpec, Division, Poly};
pub use rates::{
    classify, delta, fit_rate, lower_bound, lower_bound_spec, sweep_and_fit, RateFit,
    RatePrediction, Regime, SweepPoint, SweepProblem, SweepSolver,
};
pub use space::{
    bj_residual, evaluation_bound, multiplication_bound_check, norm, wiener_norm, Exponent,
    MultiplicationCheck, SpaceParams,
};
pub use weights::{TailRule, Weight, WeightSpec};
