use num_complex::Complex64;

use super::{assemble, require_nonzero, OpaResult, SolverKind};
use crate::error::{OpaError, Result};
use crate::linalg::BandedHermitian;
use crate::poly::Poly;
use crate::space::{Exponent, SpaceParams};
use crate::weights::Weight;

/// Gram matrices whose estimated condition number exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e14;

/// Orthogonal projection of `1` onto `P_n f` in `l^2_A(w)`.
///
/// The normal equations `<1 - p_n f, z^j f>_w = 0`, `j = 0..=n`, form a
/// banded Hermitian positive-definite system of bandwidth `deg f`, solved by
/// Cholesky.
pub fn solve_hilbert(f: &Poly, n: usize, w: &Weight) -> Result<OpaResult> {
    let sp = SpaceParams::new(Exponent::Finite(2.0), w.clone())?;
    let approximant = hilbert_coefficients(f, n, w)?;
    Ok(assemble(
        f,
        approximant,
        n,
        &sp,
        1,
        true,
        SolverKind::Hilbert,
    ))
}

/// The `l^2_A(w)` approximant, reported with norms measured in `sp`.
pub fn solve_hilbert_in(f: &Poly, n: usize, w: &Weight, sp: &SpaceParams) -> Result<OpaResult> {
    let approximant = hilbert_coefficients(f, n, w)?;
    Ok(assemble(
        f,
        approximant,
        n,
        sp,
        1,
        true,
        SolverKind::Hilbert,
    ))
}

pub(crate) fn hilbert_coefficients(f: &Poly, n: usize, w: &Weight) -> Result<Poly> {
    let d = require_nonzero(f)?;
    let a = f.coeffs();
    let weights = w.values(n + d + 1);
    let mut gram = BandedHermitian::<Complex64>::zeros(n + 1, d);
    for j in 0..=n {
        for k in j.saturating_sub(d)..=j {
            // G[j][k] = sum_t w_t a_{t-k} conj(a_{t-j}), t in [j, k+d]
            let s: Complex64 = (j..=k + d)
                .map(|t| a[t - k] * a[t - j].conj() * weights[t])
                .sum();
            gram.add_lower(j, k, s);
        }
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); n + 1];
    rhs[0] = a[0].conj() * weights[0];
    let chol = gram.cholesky().ok_or(OpaError::IllConditioned {
        estimate: f64::INFINITY,
    })?;
    let estimate = chol.condition_estimate();
    if !(estimate <= MAX_CONDITION) {
        return Err(OpaError::IllConditioned { estimate });
    }
    Ok(Poly::new(chol.solve(&rhs)))
}
