//! Norms and orthogonality in weighted analytic sequence spaces.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OpaError, Result};
use crate::poly::{signed_power, Poly};
use crate::weights::Weight;

/// Default tolerance for deciding Birkhoff-James orthogonality from a
/// normalized residual.
pub const BJ_TOL: f64 = 1e-8;

/// An exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    /// Hoelder conjugate, with `1 <-> inf`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `1/p`, zero for infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// True for `1 < p < inf`.
    pub fn is_smooth(self) -> bool {
        matches!(self, Exponent::Finite(p) if p > 1.0)
    }

    pub fn is_flat(self) -> bool {
        !self.is_smooth()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = OpaError;
    fn from_str(s: &str) -> Result<Exponent> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| OpaError::Parse(format!("cannot parse exponent {s:?}")))?;
                if p.is_infinite() && p > 0.0 {
                    Ok(Exponent::Infinity)
                } else {
                    Ok(Exponent::Finite(p))
                }
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(p) => Ok(Exponent::Finite(p)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The space `l^p_A(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceParams {
    p: Exponent,
    weight: Weight,
}

impl SpaceParams {
    pub fn new(p: Exponent, weight: Weight) -> Result<Self> {
        if let Exponent::Finite(v) = p {
            if !(v >= 1.0) || !v.is_finite() {
                return Err(OpaError::Argument(format!(
                    "p must lie in [1, inf], got {v}"
                )));
            }
        }
        Ok(SpaceParams { p, weight })
    }

    /// `l^{p,alpha}_A`, the power-weight space.
    pub fn power(p: f64, alpha: f64) -> Result<Self> {
        Self::new(Exponent::Finite(p), Weight::power(alpha)?)
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.p.conjugate()
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn with_weight(&self, weight: Weight) -> SpaceParams {
        SpaceParams { p: self.p, weight }
    }

    /// `p` for `1 < p < inf`, otherwise an unsupported-exponent error.
    pub fn smooth_p(&self) -> Result<f64> {
        match self.p {
            Exponent::Finite(p) if p > 1.0 => Ok(p),
            other => Err(OpaError::UnsupportedExponent(other.to_string())),
        }
    }
}

/// `sum_k |a_k|^p w_k` for finite `p`, `sup_k |a_k| w_k` for `p = inf`.
pub fn norm_pow_coeffs(coeffs: &[Complex64], sp: &SpaceParams) -> f64 {
    let w = sp.weight();
    match sp.p() {
        Exponent::Finite(p) => coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let m = a.norm();
                if m == 0.0 {
                    0.0
                } else if p == 2.0 {
                    m * m * w.at(k)
                } else {
                    m.powf(p) * w.at(k)
                }
            })
            .sum(),
        Exponent::Infinity => coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm() * w.at(k))
            .fold(0.0, f64::max),
    }
}

pub fn norm_coeffs(coeffs: &[Complex64], sp: &SpaceParams) -> f64 {
    let s = norm_pow_coeffs(coeffs, sp);
    match sp.p() {
        Exponent::Finite(1.0) => s,
        Exponent::Finite(2.0) => s.sqrt(),
        Exponent::Finite(p) => s.powf(1.0 / p),
        Exponent::Infinity => s,
    }
}

/// `||g||_{p,w}`
pub fn norm(g: &Poly, sp: &SpaceParams) -> f64 {
    norm_coeffs(g.coeffs(), sp)
}

/// `||g||_{p,w}^p`, or the norm itself when `p = inf`.
pub fn norm_pow(g: &Poly, sp: &SpaceParams) -> f64 {
    norm_pow_coeffs(g.coeffs(), sp)
}

/// `sum_k |a_k|`
pub fn wiener_norm(g: &Poly) -> f64 {
    g.coeffs().iter().map(|a| a.norm()).sum()
}

/// `sum_n f(n)^<p-1> g(n) w_n`; zero exactly when `f` is Birkhoff-James
/// orthogonal to `g`.
pub fn bj_residual(f: &Poly, g: &Poly, sp: &SpaceParams) -> Result<Complex64> {
    let p = sp.smooth_p()?;
    Ok(bj_residual_coeffs(f.coeffs(), g.coeffs(), p, sp.weight()))
}

pub(crate) fn bj_residual_coeffs(
    f: &[Complex64],
    g: &[Complex64],
    p: f64,
    w: &Weight,
) -> Complex64 {
    f.iter()
        .zip(g)
        .enumerate()
        .map(|(n, (a, b))| signed_power(*a, p - 1.0) * b * w.at(n))
        .sum()
}

/// The residual after scaling both inputs to unit norm:
/// `bj(f, g) / (||f||^{p-1} ||g||)`. Zero inputs give zero.
pub fn bj_residual_normalized(f: &Poly, g: &Poly, sp: &SpaceParams) -> Result<Complex64> {
    let p = sp.smooth_p()?;
    let (nf, ng) = (norm(f, sp), norm(g, sp));
    if nf == 0.0 || ng == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(bj_residual_coeffs(f.coeffs(), g.coeffs(), p, sp.weight()) / (nf.powf(p - 1.0) * ng))
}

/// `h(r) = sum_n w_n^{-1/p} r^n`, so that `|f(z0)| <= ||f|| h(|z0|)`.
/// For `p = inf` the exponent is `-1`.
pub fn evaluation_bound(sp: &SpaceParams, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(OpaError::Argument(format!(
            "radius must lie in [0, 1), got {r}"
        )));
    }
    let exponent = match sp.p() {
        Exponent::Finite(p) => -1.0 / p,
        Exponent::Infinity => -1.0,
    };
    let w = sp.weight();
    let mut sum = 1.0;
    if r == 0.0 {
        return Ok(sum);
    }
    let mut prev = 1.0;
    let mut rn = 1.0;
    for n in 1.. {
        rn *= r;
        let term = w.at(n).powf(exponent) * rn;
        sum += term;
        let ratio = term / prev;
        prev = term;
        // the ratio tends to r < 1, so the tail behaves like a geometric series
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-15 * sum {
            break;
        }
        if rn == 0.0 || n > 10_000_000 {
            break;
        }
    }
    Ok(sum)
}

/// `T(g)`: coefficient `n` scaled by `w_n^{1/p}`, an isometry onto the
/// unweighted space.
pub fn to_unweighted(g: &Poly, sp: &SpaceParams) -> Poly {
    let e = sp.p().reciprocal();
    let e = if sp.p() == Exponent::Infinity { 1.0 } else { e };
    Poly::new(
        g.coeffs()
            .iter()
            .enumerate()
            .map(|(n, a)| a * sp.weight().at(n).powf(e))
            .collect(),
    )
}

/// Outcome of the product estimate
/// `||fg|| <= C (||f||_1 ||g|| + ||f|| ||g||_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplicationCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// The constant `C_{p,w}` used in `rhs`.
    pub constant: f64,
    /// `||X|| + ||Y||`, where `X_k` (`Y_k`) sums `|a_t||b_{k-t}|` over
    /// `t <= k/2` (over `k-t <= k/2`), with odd `k/2` read as `floor(k/2)+1`.
    /// Always between `lhs` and `rhs`.
    pub split_bound: f64,
    pub holds: bool,
}

/// `C_{p,w} = 2 C^{1/p}` (`2 C` for `p = inf`), where `C` is the weight's
/// doubling constant. The factor 2 covers the two halves of the split
/// convolution; each half is bounded with one doubling step.
pub fn multiplication_constant(sp: &SpaceParams) -> f64 {
    let c = sp.weight().doubling_constant();
    match sp.p() {
        Exponent::Finite(p) => 2.0 * c.powf(1.0 / p),
        Exponent::Infinity => 2.0 * c,
    }
}

pub fn multiplication_bound_check(f: &Poly, g: &Poly, sp: &SpaceParams) -> MultiplicationCheck {
    let product = f * g;
    let lhs = norm(&product, sp);
    let constant = multiplication_constant(sp);
    let rhs = constant * (wiener_norm(f) * norm(g, sp) + norm(f, sp) * wiener_norm(g));
    let split_bound = split_norm(f, g, sp) + split_norm(g, f, sp);
    MultiplicationCheck {
        lhs,
        rhs,
        constant,
        split_bound,
        holds: lhs <= rhs * (1.0 + 1e-12),
    }
}

/// `k/2` with odd `k` rounded up.
#[inline]
pub fn half_up(k: usize) -> usize {
    k.div_ceil(2)
}

fn split_norm(f: &Poly, g: &Poly, sp: &SpaceParams) -> f64 {
    let (a, b) = (f.coeffs(), g.coeffs());
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let len = a.len() + b.len() - 1;
    let partial: Vec<Complex64> = (0..len)
        .map(|k| {
            let top = half_up(k).min(a.len() - 1);
            let s: f64 = (0..=top)
                .filter(|&t| k - t < b.len())
                .map(|t| a[t].norm() * b[k - t].norm())
                .sum();
            Complex64::new(s, 0.0)
        })
        .collect();
    norm_coeffs(&partial, sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::Finite(1.0).conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::Finite(1.0));
        assert_eq!(Exponent::Finite(2.0).conjugate(), Exponent::Finite(2.0));
        assert_eq!(Exponent::Finite(3.0).conjugate(), Exponent::Finite(1.5));
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let e = Exponent::Finite(p);
            assert_relative_eq!(
                e.reciprocal() + e.conjugate().reciprocal(),
                1.0,
                epsilon = 1e-15
            );
        }
        assert!(SpaceParams::power(0.5, 0.0).is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("1.5".parse::<Exponent>().unwrap(), Exponent::Finite(1.5));
    }

    #[test]
    fn norm_examples() {
        let one_minus_z = Poly::from_real(&[1.0, -1.0]);
        assert_relative_eq!(
            norm(&one_minus_z, &SpaceParams::power(2.0, 0.0).unwrap()),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(
            norm(&one_minus_z, &SpaceParams::power(1.0, 1.0).unwrap()),
            3.0
        );
        let sp = SpaceParams::new(Exponent::Infinity, Weight::power(1.0).unwrap()).unwrap();
        assert_eq!(norm(&Poly::from_real(&[1.0, 1.0, 1.0]), &sp), 3.0);
    }

    #[test]
    fn wiener_examples() {
        assert_eq!(wiener_norm(&Poly::from_real(&[1.0, -2.0, 1.0])), 4.0);
        assert_eq!(wiener_norm(&Poly::zero()), 0.0);
        for d in 1..6 {
            let p = &Poly::one() - &Poly::monomial(d, c(1.0, 0.0));
            assert_eq!(wiener_norm(&p), 2.0);
        }
    }

    #[test]
    fn bj_examples() {
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let f = Poly::from_real(&[1.0, -1.0]);
        assert_eq!(bj_residual(&f, &Poly::zero(), &sp).unwrap(), c(0.0, 0.0));
        for (p, alpha) in [(1.5, -1.0), (2.0, 0.0), (4.0, 2.0)] {
            let sp = SpaceParams::power(p, alpha).unwrap();
            let z = Poly::monomial(1, c(1.0, 0.0));
            assert_eq!(bj_residual(&z, &Poly::one(), &sp).unwrap(), c(0.0, 0.0));
        }
        let r = bj_residual(&f, &Poly::one(), &sp).unwrap();
        assert_eq!(r, c(1.0, 0.0));
        // in the Hilbert case this is the conjugate inner product <1, 1 - z>
        let inner: Complex64 = Poly::one()
            .coeffs()
            .iter()
            .zip(f.coeffs())
            .map(|(a, b)| a * b.conj())
            .sum();
        assert_eq!(r, inner.conj());
        let flat = SpaceParams::power(1.0, 0.0).unwrap();
        assert!(matches!(
            bj_residual(&f, &f, &flat),
            Err(OpaError::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn evaluation_bound_examples() {
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        assert_eq!(evaluation_bound(&sp, 0.0).unwrap(), 1.0);
        for p in [1.0, 1.5, 2.0, 5.0] {
            let sp = SpaceParams::power(p, 0.0).unwrap();
            assert_relative_eq!(evaluation_bound(&sp, 0.5).unwrap(), 2.0, epsilon = 1e-14);
        }
        let sp = SpaceParams::power(2.0, 2.0).unwrap();
        assert_relative_eq!(
            evaluation_bound(&sp, 0.5).unwrap(),
            2.0 * 2f64.ln(),
            epsilon = 1e-14
        );
        assert!(evaluation_bound(&sp, 1.0).is_err());
        let inf = SpaceParams::new(Exponent::Infinity, Weight::power(2.0).unwrap()).unwrap();
        // sum (n+1)^-2 r^n at r = 1/2 is 2 Li_2(1/2) = pi^2/6 - ln(2)^2
        let two_li2 = std::f64::consts::PI.powi(2) / 6.0 - 2f64.ln().powi(2);
        assert_relative_eq!(
            evaluation_bound(&inf, 0.5).unwrap(),
            two_li2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn multiplication_examples() {
        let sp = SpaceParams::power(2.0, 0.0).unwrap();
        let g = Poly::new(vec![c(0.3, 1.0), c(-2.0, 0.5), c(0.0, 0.7)]);
        assert!(multiplication_bound_check(&Poly::one(), &g, &sp).holds);
        let f = Poly::from_real(&[1.0, -1.0]);
        let check = multiplication_bound_check(&f, &f, &sp);
        assert_relative_eq!(check.lhs, 6f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(check.rhs, 8.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert!(check.holds);
        let check = multiplication_bound_check(&Poly::zero(), &g, &sp);
        assert_eq!(check.lhs, 0.0);
        assert!(check.holds);
    }

    #[test]
    fn half_up_convention() {
        assert_eq!(half_up(0), 0);
        assert_eq!(half_up(1), 1);
        assert_eq!(half_up(4), 2);
        assert_eq!(half_up(5), 3);
    }
}
