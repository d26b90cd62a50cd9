use num_complex::Complex64;
use opa_core::space::half_up;
use opa_core::{
    bj_residual, closed_form_one_minus_zd, evaluation_bound, lower_bound,
    multiplication_bound_check, norm, solve_convex, solve_hilbert, Exponent, Poly, SolverOpts,
    SpaceParams, Weight,
};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn poly(max_len: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(complex(), 1..=max_len).prop_map(Poly::new)
}

/// `1 + a_1 z + ...`: a problem whose constant term keeps the solves well scaled.
fn unit_constant_poly(max_degree: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(complex(), 1..=max_degree).prop_map(|tail| {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        coeffs.extend(tail);
        Poly::new(coeffs)
    })
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::Finite(1.0)),
        (1.0f64..6.0).prop_map(Exponent::Finite),
        Just(Exponent::Infinity),
    ]
}

fn space() -> impl Strategy<Value = SpaceParams> {
    (exponent(), -2.0f64..2.0)
        .prop_map(|(p, alpha)| SpaceParams::new(p, Weight::power(alpha).unwrap()).unwrap())
}

fn smooth_space() -> impl Strategy<Value = SpaceParams> {
    (1.5f64..4.0, -1.0f64..1.0).prop_map(|(p, alpha)| SpaceParams::power(p, alpha).unwrap())
}

fn converged(f: &Poly, n: usize, sp: &SpaceParams) -> opa_core::OpaResult {
    let res = solve_convex(f, n, sp, &SolverOpts::default()).unwrap();
    assert!(res.converged, "n={n}, {sp:?}, f={:?}", f.coeffs());
    res
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_division_recovers_the_factor(a in poly(6), b in unit_constant_poly(3)) {
        prop_assume!(b.coeffs().last().unwrap().norm() > 0.25);
        let product = &a * &b;
        let division = product.exact_div(&b, 1e-10).unwrap();
        prop_assert!((&division.quotient - &a).sup_norm() <= 1e-10 * (1.0 + a.sup_norm()));
    }

    #[test]
    fn division_identity_holds(num in poly(8), den in poly(4)) {
        prop_assume!(den.coeffs().last().unwrap().norm() > 0.1);
        let division = num.div_rem(&den).unwrap();
        let rebuilt = &(&division.quotient * &den) + &division.remainder;
        prop_assert!((&rebuilt - &num).sup_norm() <= 1e-9 * (1.0 + num.sup_norm()));
        if let Some(rd) = division.remainder.degree() {
            prop_assert!(rd < den.degree().unwrap());
        }
    }

    #[test]
    fn norm_is_a_norm(f in poly(8), g in poly(8), c in complex(), sp in space()) {
        let (nf, ng) = (norm(&f, &sp), norm(&g, &sp));
        prop_assert!(norm(&(&f + &g), &sp) <= (nf + ng) * (1.0 + 1e-12));
        let scaled = norm(&f.scale(c), &sp);
        prop_assert!((scaled - c.norm() * nf).abs() <= 1e-12 * (1.0 + nf));
    }

    #[test]
    fn rotation_preserves_norm(f in poly(8), theta in 0.0f64..6.3, sp in space()) {
        let (a, b) = (norm(&f, &sp), norm(&f.rotate(theta), &sp));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn point_evaluation_is_bounded(f in poly(8), r in 0.0f64..0.95, phase in 0.0f64..6.3, sp in space()) {
        let z = Complex64::from_polar(r, phase);
        let bound = norm(&f, &sp) * evaluation_bound(&sp, r).unwrap();
        prop_assert!(f.eval(z).norm() <= bound * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn multiplication_estimate_holds(f in poly(8), g in poly(8), sp in space()) {
        let check = multiplication_bound_check(&f, &g, &sp);
        prop_assert!(check.lhs <= check.split_bound * (1.0 + 1e-12) + 1e-15);
        prop_assert!(check.split_bound <= check.rhs * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn half_up_reads_odd_halves_upward(k in 0usize..10_000) {
        let h = half_up(k);
        prop_assert!(2 * h == k || 2 * h == k + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimal_norm_decreases_with_degree(f in unit_constant_poly(3), sp in smooth_space()) {
        let mut previous = norm(&Poly::one(), &sp);
        for n in [0usize, 1, 2, 4, 8] {
            let res = converged(&f, n, &sp);
            prop_assert!(res.optimal_norm <= previous * (1.0 + 1e-9), "n={n}: {} > {previous}", res.optimal_norm);
            previous = res.optimal_norm;
        }
    }

    #[test]
    fn residual_is_orthogonal_to_the_search_space(f in unit_constant_poly(3), sp in smooth_space(), n in 0usize..8) {
        let res = converged(&f, n, &sp);
        let p = sp.smooth_p().unwrap();
        // residual entries are only known to `rounding`, and |r|^{p-1} amplifies that for p < 2
        let coefficient_mass: f64 = res.approximant.coeffs().iter().map(|c| c.norm()).sum();
        let rounding = 64.0 * f64::EPSILON * (1.0 + coefficient_mass * f.sup_norm());
        let allowance = 1e-6 + res.residual.coeffs().len() as f64 * (rounding / res.optimal_norm).powf(p - 1.0);
        let scale = res.optimal_norm.powf(p - 1.0);
        for j in 0..=n {
            let direction = &Poly::monomial(j, Complex64::new(1.0, 0.0)) * &f;
            let bj = bj_residual(&res.residual, &direction, &sp).unwrap();
            prop_assert!(bj.norm() <= allowance * scale * norm(&direction, &sp), "j={j}: {bj}");
        }
    }

    #[test]
    fn rotating_f_rotates_the_approximant(f in unit_constant_poly(3), theta in 0.0f64..6.3, sp in smooth_space()) {
        let n = 5;
        let base = converged(&f, n, &sp);
        let turned = converged(&f.rotate(theta), n, &sp);
        prop_assert!((&turned.approximant - &base.approximant.rotate(theta)).sup_norm() <= 1e-6);
        prop_assert!((turned.optimal_norm - base.optimal_norm).abs() <= 1e-10);
    }

    #[test]
    fn solutions_respect_the_lower_bound(f in unit_constant_poly(3), sp in smooth_space(), n in 0usize..12) {
        let res = converged(&f, n, &sp);
        if let Ok(bound) = lower_bound(&f, n, &sp) {
            prop_assert!(bound <= res.optimal_norm + 1e-12, "{bound} > {}", res.optimal_norm);
        }
    }

    #[test]
    fn hilbert_matches_convex_at_two(f in unit_constant_poly(3), alpha in -1.0f64..1.0, n in 0usize..10) {
        let w = Weight::power(alpha).unwrap();
        let sp = SpaceParams::new(Exponent::Finite(2.0), w.clone()).unwrap();
        let exact = solve_hilbert(&f, n, &w).unwrap();
        let numeric = converged(&f, n, &sp);
        prop_assert!((exact.optimal_norm - numeric.optimal_norm).abs() <= 1e-10);
    }

    #[test]
    fn closed_form_matches_convex(d in 1usize..4, n in 0usize..20, sp in smooth_space()) {
        let f = &Poly::one() - &Poly::monomial(d, Complex64::new(1.0, 0.0));
        let exact = closed_form_one_minus_zd(d, n, &sp).unwrap();
        let numeric = converged(&f, n, &sp);
        prop_assert!((&exact.approximant - &numeric.approximant).sup_norm() <= 1e-7);
    }
}
