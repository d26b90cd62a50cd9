//! The built-in verification suite: independent solvers checked against one
//! another, together with the norm inequalities that every solve must obey.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::opa::{
    closed_form_one_minus_zd, one_minus_zd, solve_convex, solve_hilbert, solve_structural,
    OpaResult, SolverOpts,
};
use crate::poly::{CircleZeroSpec, Poly};
use crate::rates::lower_bound;
use crate::space::{multiplication_bound_check, norm, Exponent, SpaceParams};
use crate::weights::Weight;

/// Outcome of one family of checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Why cases failed outright (solver errors, non-convergence).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_deviation: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Tally {
        Tally {
            name,
            tolerance,
            cases: 0,
            max_deviation: 0.0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, deviation: f64) {
        self.cases += 1;
        if deviation.is_nan() {
            self.max_deviation = f64::NAN;
        } else if !self.max_deviation.is_nan() {
            self.max_deviation = self.max_deviation.max(deviation);
        }
    }

    fn fail(&mut self, what: String) {
        self.cases += 1;
        self.failures.push(what);
    }

    fn finish(self) -> CheckReport {
        let passed = self.failures.is_empty() && self.max_deviation <= self.tolerance;
        CheckReport {
            name: self.name,
            cases: self.cases,
            max_deviation: self.max_deviation,
            tolerance: self.tolerance,
            passed,
            failures: self.failures,
        }
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn converged(label: String, r: Result<OpaResult>, tally: &mut Tally) -> Option<OpaResult> {
    match r {
        Ok(res) if res.converged => Some(res),
        Ok(_) => {
            tally.fail(format!("{label}: not converged"));
            None
        }
        Err(e) => {
            tally.fail(format!("{label}: {e}"));
            None
        }
    }
}

/// Runs every check. `seed` drives the randomized inequality probes.
pub fn run_verification(seed: u64) -> VerifyReport {
    let opts = SolverOpts::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closed = Tally::new("closed form vs convex coefficients", 1e-6);
    let mut hilbert = Tally::new("hilbert vs convex coefficients", 1e-8);
    let mut structural = Tally::new("structural vs convex optimal norm", 1e-6);
    let mut bound = Tally::new("lower bound violation", 1e-12);
    let mut ortho = Tally::new("orthogonality residual", 1e-7);
    let mut bj = Tally::new("Birkhoff-James probe deficit", 1e-8);
    let mut mult = Tally::new("multiplication estimate excess", 0.0);

    let mut certify = |res: &OpaResult, f: &Poly, sp: &SpaceParams, rng: &mut ChaCha8Rng| {
        if let Some(max) = res.ortho_residual_max {
            ortho.record(max);
        }
        let base = res.optimal_norm;
        let mut deficit = 0.0f64;
        for _ in 0..20 {
            let j = rng.gen_range(0..=res.n);
            let lambda = Complex64::from_polar(
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let g = &Poly::monomial(j, lambda) * f;
            deficit = deficit.max(base - norm(&(&res.residual + &g), sp));
        }
        bj.record(deficit);
        if let Ok(lb) = lower_bound(f, res.n, sp) {
            bound.record(lb - res.optimal_norm);
        }
    };

    for d in [1usize, 2] {
        for p in [1.5, 3.0] {
            for alpha in [0.0, 0.5] {
                let sp = SpaceParams::power(p, alpha).expect("valid power space");
                let f = one_minus_zd(d);
                for n in [3usize, 16] {
                    let label = format!("1 - z^{d}, p={p}, alpha={alpha}, n={n}");
                    let Some(conv) =
                        converged(label.clone(), solve_convex(&f, n, &sp, &opts), &mut closed)
                    else {
                        continue;
                    };
                    match closed_form_one_minus_zd(d, n, &sp) {
                        Ok(cf) => closed.record((&cf.approximant - &conv.approximant).sup_norm()),
                        Err(e) => closed.fail(format!("{label}: {e}")),
                    }
                    certify(&conv, &f, &sp, &mut rng);
                }
            }
        }
    }

    for roots in ["0:1,pi:1", "pi/2:2", "0:1,2pi/3:1,4pi/3:1"] {
        let spec = CircleZeroSpec::parse_roots(roots)
            .expect("fixed spec")
            .normalized_at_origin();
        let f = spec.expand();
        for alpha in [-1.0, 0.0, 1.0] {
            let w = Weight::power(alpha).expect("power weight");
            let sp = SpaceParams::new(Exponent::Finite(2.0), w.clone()).expect("valid space");
            for n in [2usize, 12] {
                let label = format!("roots {roots}, alpha={alpha}, n={n}");
                let Some(conv) =
                    converged(label.clone(), solve_convex(&f, n, &sp, &opts), &mut hilbert)
                else {
                    continue;
                };
                match solve_hilbert(&f, n, &w) {
                    Ok(h) => hilbert.record((&h.approximant - &conv.approximant).sup_norm()),
                    Err(e) => hilbert.fail(format!("{label}: {e}")),
                }
                certify(&conv, &f, &sp, &mut rng);
            }
        }
    }

    for roots in ["0:1,pi:1", "0:2", "0:2,pi:1"] {
        let spec = CircleZeroSpec::parse_roots(roots)
            .expect("fixed spec")
            .normalized_at_origin();
        let f = spec.expand();
        for p in [1.5, 3.0] {
            let sp = SpaceParams::power(p, 0.0).expect("valid power space");
            let n = 10;
            let label = format!("roots {roots}, p={p}, n={n}");
            let Some(conv) = converged(
                label.clone(),
                solve_convex(&f, n, &sp, &opts),
                &mut structural,
            ) else {
                continue;
            };
            match solve_structural(&spec, n, &sp, None, &opts) {
                Ok((res, _)) => structural.record(relative(res.optimal_norm, conv.optimal_norm)),
                Err(e) => structural.fail(format!("{label}: {e}")),
            }
            certify(&conv, &f, &sp, &mut rng);
        }
    }

    for p in [
        Exponent::Finite(1.0),
        Exponent::Finite(1.5),
        Exponent::Finite(2.0),
        Exponent::Infinity,
    ] {
        for alpha in [-1.0, 0.0, 1.0] {
            let sp = SpaceParams::new(p, Weight::power(alpha).expect("power weight"))
                .expect("valid space");
            for _ in 0..100 {
                let f = random_poly(&mut rng);
                let g = random_poly(&mut rng);
                let check = multiplication_bound_check(&f, &g, &sp);
                mult.record(((check.lhs - check.rhs) / check.rhs.max(f64::MIN_POSITIVE)).max(0.0));
            }
        }
    }

    let checks: Vec<CheckReport> = [closed, hilbert, structural, bound, ortho, bj, mult]
        .into_iter()
        .map(Tally::finish)
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        seed,
        checks,
        passed,
    }
}

/// Degree at most 8, coefficients in the unit square.
pub fn random_poly(rng: &mut impl Rng) -> Poly {
    let len = rng.gen_range(1..=9);
    Poly::new(
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_reproducible() {
        let a = run_verification(7);
        for check in &a.checks {
            assert!(check.passed, "{check:?}");
        }
        let b = run_verification(7);
        assert_eq!(a, b);
    }
}
