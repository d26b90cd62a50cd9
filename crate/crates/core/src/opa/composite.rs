use super::hilbert::hilbert_coefficients;
use super::{assemble, OpaResult, SolverKind};
use crate::error::{OpaError, Result};
use crate::poly::{CircleZeroSpec, Poly, DEFAULT_DIV_TOL};
use crate::space::SpaceParams;

/// Near-optimal approximant `P_n = (q_sigma g)^{d_0} / f` built from the
/// simple-zero part `g` of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub approximant: Poly,
    /// `sigma(n) = floor((n+d)/d_0) - m`
    pub sigma: usize,
    /// `q_sigma`, the Hilbert approximant to `1/g` in the weight
    /// `w^{1/(p-1)}`.
    pub hilbert_approximant: Poly,
    /// `1 - P_n f` measured in the target space.
    pub result: OpaResult,
}

/// For a power weight `(k+1)^alpha` the auxiliary Hilbert weight is
/// `(k+1)^{alpha/(p-1)}`.
pub fn composite_construction(
    spec: &CircleZeroSpec,
    n: usize,
    sp: &SpaceParams,
) -> Result<Composite> {
    let p = sp.smooth_p()?;
    let f = spec.expand();
    let d = spec.degree();
    let d0 = spec.max_multiplicity() as usize;
    let m = spec.distinct();
    let sigma = ((n + d) / d0) as i64 - m as i64;
    if sigma < 0 {
        return Err(OpaError::NTooSmall { n, sigma });
    }
    let sigma = sigma as usize;
    let g = spec.simple_part().expand();
    let hilbert_weight = sp.weight().powered(1.0 / (p - 1.0))?;
    let q = hilbert_coefficients(&g, sigma, &hilbert_weight)?;
    let power = (&q * &g).pow(d0 as u32)?;
    let division = power
        .exact_div(&f, DEFAULT_DIV_TOL)
        .map_err(|e| OpaError::Internal(format!("composite division by f failed: {e}")))?;
    let approximant = division.quotient;
    if approximant.degree().is_some_and(|deg| deg > n) {
        return Err(OpaError::Internal(format!(
            "composite approximant has degree {:?} > {n}",
            approximant.degree()
        )));
    }
    let result = assemble(
        &f,
        approximant.clone(),
        n,
        sp,
        0,
        true,
        SolverKind::Composite,
    );
    Ok(Composite {
        approximant,
        sigma,
        hilbert_approximant: q,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opa::{solve_convex, SolverOpts};
    use crate::rates::lower_bound;

    #[test]
    fn simple_zeros_collapse_to_hilbert() {
        let spec = CircleZeroSpec::parse_roots("0:1,pi/2:1").unwrap();
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let comp = composite_construction(&spec, 6, &sp).unwrap();
        assert_eq!(comp.sigma, 6);
        assert!((&comp.approximant - &comp.hilbert_approximant).sup_norm() < 1e-12);
    }

    #[test]
    fn double_root_sandwich() {
        let spec = CircleZeroSpec::parse_roots("0:2").unwrap();
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let comp = composite_construction(&spec, 8, &sp).unwrap();
        let f = spec.expand();
        let opt = solve_convex(&f, 8, &sp, &SolverOpts::default()).unwrap();
        let lb = lower_bound(&f, 8, &sp).unwrap();
        assert!(comp.result.optimal_norm >= opt.optimal_norm - 1e-12);
        assert!(comp.result.optimal_norm <= 10.0 * lb);
    }

    #[test]
    fn degree_bookkeeping() {
        let spec = CircleZeroSpec::parse_roots("0:2,pi:1").unwrap();
        let sp = SpaceParams::power(3.0, 1.0).unwrap();
        let comp = composite_construction(&spec, 10, &sp).unwrap();
        assert_eq!(comp.sigma, 4);
        assert!(comp.approximant.degree().unwrap() <= 10);
        // sigma = floor(3/2) - 2 < 0
        assert!(matches!(
            composite_construction(&spec, 0, &sp),
            Err(OpaError::NTooSmall { .. })
        ));
    }
}
