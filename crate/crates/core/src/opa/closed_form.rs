use super::{assemble, OpaResult, SolverKind};
use crate::error::{OpaError, Result};
use crate::poly::Poly;
use crate::space::SpaceParams;

/// Explicit approximant to `1/(1 - z^d)` and the quantities it is built
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub result: OpaResult,
    pub d: usize,
    /// `floor(n/d)`, the order of the reduced problem.
    pub reduced_order: usize,
    /// `delta~_k^q = sum_{t<=k} w_{dt}^{-q/p}` for `k = 0..=reduced_order+1`.
    pub delta_q: Vec<f64>,
    /// `delta~_{N+1}^{-p}`, the exact value of `||1 - P_n f||^p`.
    pub norm_p_power: f64,
}

/// `delta_k^q = sum_{t<=k} w_t^{-q/p}` for `k = 0..=k_max`, computed in the
/// dilated weight `w~_t = w_{dt}`.
pub fn delta_powers(sp: &SpaceParams, d: usize, k_max: usize) -> Result<Vec<f64>> {
    let p = sp.smooth_p()?;
    let weight = sp.weight().dilate(d)?;
    // q/p = q - 1 = 1/(p-1)
    let exponent = -1.0 / (p - 1.0);
    let mut acc = 0.0;
    Ok((0..=k_max)
        .map(|t| {
            acc += weight.at(t).powf(exponent);
            acc
        })
        .collect())
}

impl ClosedForm {
    pub fn compute(d: usize, n: usize, sp: &SpaceParams) -> Result<ClosedForm> {
        if d == 0 {
            return Err(OpaError::Argument("d must be positive".into()));
        }
        let p = sp.smooth_p()?;
        let order = n / d;
        let delta_q = delta_powers(sp, d, order + 1)?;
        let total = delta_q[order + 1];
        let reduced = Poly::from_real(
            &delta_q[..=order]
                .iter()
                .map(|s| 1.0 - s / total)
                .collect::<Vec<_>>(),
        );
        let approximant = reduced.compose_power(d);
        let f = one_minus_zd(d);
        let result = assemble(&f, approximant, n, sp, 0, true, SolverKind::Closed);
        Ok(ClosedForm {
            result,
            d,
            reduced_order: order,
            // delta^{-p} = (delta^q)^{-p/q} = total^{1-p}
            norm_p_power: total.powf(1.0 - p),
            delta_q,
        })
    }
}

/// Optimal approximant to `1/(1 - z^d)` of order `n`:
/// `P_n(z) = Q(z^d)` with `Q(z) = sum_t (1 - delta~_t^q / delta~_{N+1}^q) z^t`.
pub fn closed_form_one_minus_zd(d: usize, n: usize, sp: &SpaceParams) -> Result<OpaResult> {
    Ok(ClosedForm::compute(d, n, sp)?.result)
}

pub(crate) fn one_minus_zd(d: usize) -> Poly {
    let mut coeffs = vec![0.0; d + 1];
    coeffs[0] = 1.0;
    coeffs[d] = -1.0;
    Poly::from_real(&coeffs)
}

/// Recognizes `c (1 - z^d)` for `d >= 1`.
pub(crate) fn detect_one_minus_zd(f: &Poly) -> Option<usize> {
    let d = f.degree()?;
    let c = f.coeffs();
    if d == 0 || c[0].norm() == 0.0 || (c[d] + c[0]).norm() > 1e-14 * c[0].norm() {
        return None;
    }
    c[1..d].iter().all(|x| x.norm() == 0.0).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight;
    use num_complex::Complex64;

    #[test]
    fn hardy_space_degree_one() {
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let cf = ClosedForm::compute(1, 1, &sp).unwrap();
        let c = cf.result.approximant.coeffs();
        assert!((c[0].re - 2.0 / 3.0).abs() < 1e-15 && (c[1].re - 1.0 / 3.0).abs() < 1e-15);
        assert!((cf.norm_p_power - 1.0 / 3.0).abs() < 1e-15);
        assert!((cf.result.optimal_norm.powi(2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unit_weight_any_p() {
        let sp = SpaceParams::power(4.0, 0.0).unwrap();
        let cf = ClosedForm::compute(1, 1, &sp).unwrap();
        let c = cf.result.approximant.coeffs();
        assert!((c[0].re - 2.0 / 3.0).abs() < 1e-15 && (c[1].re - 1.0 / 3.0).abs() < 1e-15);
        assert!((cf.norm_p_power - 1.0 / 27.0).abs() < 1e-16);
    }

    #[test]
    fn dilated_reduction() {
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let cf = ClosedForm::compute(2, 3, &sp).unwrap();
        let expected = Poly::from_real(&[2.0 / 3.0, 0.0, 1.0 / 3.0]);
        assert!((&cf.result.approximant - &expected).sup_norm() < 1e-15);
        assert!((cf.norm_p_power - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn norm_identity_and_orthogonality() {
        for (p, alpha, d, n) in [(1.5, -1.0, 1, 40), (3.0, 0.5, 2, 33), (2.5, 1.0, 3, 20)] {
            let sp = SpaceParams::new(
                crate::space::Exponent::Finite(p),
                Weight::power(alpha).unwrap(),
            )
            .unwrap();
            let cf = ClosedForm::compute(d, n, &sp).unwrap();
            let np = cf.result.norm_p_power();
            assert!((np / cf.norm_p_power - 1.0).abs() < 1e-12);
            assert!(cf.result.ortho_residual_max.unwrap() < 1e-12);
        }
    }

    #[test]
    fn flat_exponents_rejected() {
        let sp = SpaceParams::power(1.0, 0.0).unwrap();
        assert!(ClosedForm::compute(1, 3, &sp).is_err());
        assert!(ClosedForm::compute(0, 3, &SpaceParams::power(2.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn detection() {
        assert_eq!(detect_one_minus_zd(&one_minus_zd(3)), Some(3));
        assert_eq!(
            detect_one_minus_zd(&one_minus_zd(3).scale(Complex64::new(0.0, 2.0))),
            Some(3)
        );
        assert_eq!(detect_one_minus_zd(&Poly::from_real(&[1.0, 1.0])), None);
        assert_eq!(
            detect_one_minus_zd(&Poly::from_real(&[1.0, 0.5, -1.0])),
            None
        );
    }
}
