//! Complex polynomials, the signed power `z^<s>`, and zero sets on the unit
//! circle.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OpaError, Result};

/// Largest degree any constructed polynomial may have.
pub const DEGREE_CAP: usize = 1 << 16;

/// Default relative tolerance of [`Poly::exact_div`].
pub const DEFAULT_DIV_TOL: f64 = 1e-9;

/// `z^<s> = r^s e^{-i theta}` for `z = r e^{i theta}`, and `0^<s> = 0`.
///
/// `s = 1` is complex conjugation; `z * z^<p-1> = |z|^p`.
#[inline]
pub fn signed_power(z: Complex64, s: f64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = z.re.hypot(z.im);
    // conj(z) / r is the unit phase e^{-i theta}
    z.conj() * r.powf(s - 1.0)
}

/// Dense polynomial with complex coefficients, lowest degree first.
///
/// Trailing coefficients that are exactly zero are dropped, so the zero
/// polynomial has no coefficients and no degree.
#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.coeffs.iter().map(|c| (c.re, c.im)))
            .finish()
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `c z^k`
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero past the degree.
    #[inline]
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient modulus.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `p(z^d)`
    pub fn compose_power(&self, d: usize) -> Poly {
        if self.is_zero() || d == 1 {
            return self.clone();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (self.coeffs.len() - 1) * d + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * d] = *c;
        }
        Poly::new(coeffs)
    }

    /// `p(e^{i theta} z)`
    pub fn rotate(&self, theta: f64) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * Complex64::from_polar(1.0, theta * k as f64))
                .collect(),
        )
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `p^(s)(z0)`, the `s`-th derivative at `z0`.
    ///
    /// Repeated synthetic division by `z - z0` produces the Taylor
    /// coefficients at `z0`; the `s`-th one times `s!` is the derivative.
    pub fn eval_derivative(&self, z0: Complex64, order: usize) -> Complex64 {
        if order >= self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        let mut work = self.coeffs.clone();
        let mut taylor = Complex64::new(0.0, 0.0);
        for pass in 0..=order {
            let top = work.len();
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (pass..top).rev() {
                acc = acc * z0 + work[k];
                work[k] = acc;
            }
            taylor = work[pass];
        }
        let factorial: f64 = (1..=order).map(|k| k as f64).product();
        taylor * factorial
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        if let (Some(a), Some(b)) = (self.degree(), other.degree()) {
            if a + b > DEGREE_CAP {
                return Err(OpaError::Argument(format!(
                    "product degree {} exceeds cap {DEGREE_CAP}",
                    a + b
                )));
            }
        }
        Ok(self * other)
    }

    pub fn pow(&self, k: u32) -> Result<Poly> {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }

    /// Long division `num = q den + r`, accepted only when the remainder is
    /// negligible: `max|r| <= tol * max|num|`.
    pub fn exact_div(&self, den: &Poly, tol: f64) -> Result<Division> {
        let division = self.div_rem(den)?;
        let bound = tol * self.sup_norm();
        if division.remainder_norm > bound {
            return Err(OpaError::InexactDivision {
                remainder: division.remainder_norm,
                bound,
            });
        }
        Ok(division)
    }

    pub fn div_rem(&self, den: &Poly) -> Result<Division> {
        let dd = den
            .degree()
            .ok_or_else(|| OpaError::Argument("division by the zero polynomial".into()))?;
        let lead = den.coeffs[dd];
        let Some(nd) = self.degree().filter(|&nd| nd >= dd) else {
            return Ok(Division {
                quotient: Poly::zero(),
                remainder_norm: self.sup_norm(),
                remainder: self.clone(),
            });
        };
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::new(0.0, 0.0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd] / lead;
            quot[k] = c;
            for (j, a) in den.coeffs.iter().enumerate() {
                rem[k + j] -= c * a;
            }
            rem[k + dd] = Complex64::new(0.0, 0.0);
        }
        rem.truncate(dd);
        let remainder = Poly::new(rem);
        Ok(Division {
            quotient: Poly::new(quot),
            remainder_norm: remainder.sup_norm(),
            remainder,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    pub quotient: Poly,
    pub remainder: Poly,
    /// `max |r_k|`
    pub remainder_norm: f64,
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// An angle on the unit circle, either an exact rational multiple of pi or
/// plain radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// `num/den * pi`, reduced, with `den > 0`.
    PiFraction {
        num: i64,
        den: i64,
    },
    Radians(f64),
}

impl Angle {
    pub fn pi_fraction(num: i64, den: i64) -> Result<Angle> {
        if den == 0 {
            return Err(OpaError::Parse("zero denominator in angle".into()));
        }
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        // reduce modulo 2 pi into [0, 2 pi)
        num = num.rem_euclid(2 * den);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        if g > 1 {
            num /= g;
            den /= g;
        }
        Ok(Angle::PiFraction { num, den })
    }

    pub fn radians(value: f64) -> Angle {
        Angle::Radians(value.rem_euclid(2.0 * PI))
    }

    /// Parses `0`, `pi`, `-pi/3`, `3pi/4`, `2*pi/3`, `pi/2`, `1/2` (no pi:
    /// rational radians are rejected unless written as a decimal), or a
    /// decimal number of radians such as `1.25`.
    pub fn parse(text: &str) -> Result<Angle> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = s.to_ascii_lowercase();
        let err = || OpaError::Parse(format!("cannot parse angle {text:?}"));
        if lower.is_empty() {
            return Err(err());
        }
        if let Some(pos) = lower.find("pi") {
            let (head, rest) = lower.split_at(pos);
            let rest = &rest[2..];
            let head = head.strip_suffix('*').unwrap_or(head);
            let num: i64 = match head {
                "" | "+" => 1,
                "-" => -1,
                h => h.parse().map_err(|_| err())?,
            };
            let den: i64 = match rest {
                "" => 1,
                r => r
                    .strip_prefix('/')
                    .ok_or_else(err)?
                    .parse()
                    .map_err(|_| err())?,
            };
            if den <= 0 {
                return Err(err());
            }
            return Angle::pi_fraction(num, den);
        }
        if let Ok(int) = lower.parse::<i64>() {
            if int == 0 {
                return Angle::pi_fraction(0, 1);
            }
        }
        let value: f64 = lower.parse().map_err(|_| err())?;
        if !value.is_finite() {
            return Err(err());
        }
        Ok(Angle::radians(value))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Angle::PiFraction { num, den } => PI * num as f64 / den as f64,
            Angle::Radians(v) => v,
        }
    }

    /// `e^{i theta}`, exact at multiples of `pi/2`.
    pub fn point(&self) -> Complex64 {
        if let Angle::PiFraction { num, den } = *self {
            if (2 * num) % den == 0 {
                return match ((2 * num) / den).rem_euclid(4) {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
            }
        }
        let (s, c) = self.value().sin_cos();
        Complex64::new(c, s)
    }

    fn same_point(&self, other: &Angle) -> bool {
        match (self, other) {
            (Angle::PiFraction { .. }, Angle::PiFraction { .. }) => self == other,
            _ => {
                let diff = (self.value() - other.value()).rem_euclid(2.0 * PI);
                diff < 1e-12 || 2.0 * PI - diff < 1e-12
            }
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiFraction { num: 0, .. } => write!(f, "0"),
            Angle::PiFraction { num, den } => {
                match num {
                    1 => write!(f, "pi")?,
                    n => write!(f, "{n}pi")?,
                }
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                Ok(())
            }
            Angle::Radians(v) => write!(f, "{v}"),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Angle::Radians(v) => serializer.serialize_f64(*v),
            _ => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => Angle::parse(&s).map_err(serde::de::Error::custom),
            Raw::Number(0.0) => Ok(Angle::PiFraction { num: 0, den: 1 }),
            Raw::Number(v) => Ok(Angle::radians(v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleRoot {
    pub angle: Angle,
    #[serde(rename = "mult")]
    pub multiplicity: u32,
}

/// `leading * prod_i (z - e^{i theta_i})^{b_i}`, with every root on the unit
/// circle by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleZeroSpec {
    roots: Vec<CircleRoot>,
    leading: Complex64,
}

impl CircleZeroSpec {
    pub fn new(roots: Vec<CircleRoot>) -> Result<Self> {
        Self::with_leading(roots, Complex64::new(1.0, 0.0))
    }

    pub fn with_leading(roots: Vec<CircleRoot>, leading: Complex64) -> Result<Self> {
        if roots.is_empty() {
            return Err(OpaError::Argument("circle zero set is empty".into()));
        }
        if leading == Complex64::new(0.0, 0.0) || !leading.is_finite() {
            return Err(OpaError::Argument(
                "leading coefficient must be nonzero".into(),
            ));
        }
        for (i, r) in roots.iter().enumerate() {
            if r.multiplicity == 0 {
                return Err(OpaError::Argument(format!(
                    "root {} has multiplicity 0",
                    r.angle
                )));
            }
            if roots[..i].iter().any(|o| o.angle.same_point(&r.angle)) {
                return Err(OpaError::Argument(format!(
                    "duplicate root angle {}",
                    r.angle
                )));
            }
        }
        let spec = CircleZeroSpec { roots, leading };
        if spec.degree() > DEGREE_CAP {
            return Err(OpaError::Argument(format!(
                "degree exceeds cap {DEGREE_CAP}"
            )));
        }
        Ok(spec)
    }

    /// Parses `"<angle>:<mult>,<angle>:<mult>,..."`, e.g. `"0:1,pi:2"`.
    /// A missing `:<mult>` means a simple root.
    pub fn parse_roots(text: &str) -> Result<Self> {
        let roots = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|item| {
                let (angle, mult) = match item.rsplit_once(':') {
                    Some((a, m)) => (
                        a,
                        m.trim().parse::<u32>().map_err(|_| {
                            OpaError::Parse(format!("bad multiplicity in {item:?}"))
                        })?,
                    ),
                    None => (item, 1),
                };
                Ok(CircleRoot {
                    angle: Angle::parse(angle)?,
                    multiplicity: mult,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(roots)
    }

    pub fn roots(&self) -> &[CircleRoot] {
        &self.roots
    }

    pub fn leading(&self) -> Complex64 {
        self.leading
    }

    /// `d`, the total degree.
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity as usize).sum()
    }

    /// `m`, the number of distinct roots.
    pub fn distinct(&self) -> usize {
        self.roots.len()
    }

    /// `d_0`, the largest multiplicity.
    pub fn max_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).max().unwrap_or(0)
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.angle.point()).collect()
    }

    pub fn multiplicities(&self) -> Vec<u32> {
        self.roots.iter().map(|r| r.multiplicity).collect()
    }

    pub fn has_simple_zeros(&self) -> bool {
        self.max_multiplicity() == 1
    }

    /// Same zero set, every root simple, leading coefficient one.
    pub fn simple_part(&self) -> CircleZeroSpec {
        CircleZeroSpec {
            roots: self
                .roots
                .iter()
                .map(|r| CircleRoot {
                    angle: r.angle,
                    multiplicity: 1,
                })
                .collect(),
            leading: Complex64::new(1.0, 0.0),
        }
    }

    /// Same zeros, scaled so that the constant term is one.
    pub fn normalized_at_origin(&self) -> CircleZeroSpec {
        let constant = self.roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| {
            acc * (-r.angle.point()).powu(r.multiplicity)
        });
        CircleZeroSpec {
            roots: self.roots.clone(),
            leading: constant.inv(),
        }
    }

    pub fn expand(&self) -> Poly {
        let mut out = Poly::constant(self.leading);
        for (root, z) in self.roots.iter().zip(self.points()) {
            let factor = Poly::new(vec![-z, Complex64::new(1.0, 0.0)]);
            for _ in 0..root.multiplicity {
                out = &out * &factor;
            }
        }
        out
    }
}
