//! Small linear-algebra kernels: banded Hermitian Cholesky and dense
//! Gaussian elimination.

use std::ops::{Add, AddAssign, Div, Mul, Sub, SubAssign};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Lower band of a Hermitian matrix: entry `(i, j)` with `i - b <= j <= i`
/// lives at `i * (b + 1) + (j + b - i)`.
#[derive(Debug, Clone)]
pub struct BandedHermitian<T> {
    n: usize,
    bandwidth: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedHermitian<T> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedHermitian {
            n,
            bandwidth,
            data: vec![T::zero(); n * (bandwidth + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        i * (self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    /// Entry `(i, j)` for `j <= i` within the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[self.idx(i, j)]
    }

    /// Adds to entry `(i, j)` of the lower triangle (`j <= i`).
    #[inline]
    pub fn add_lower(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.n {
            self.add_lower(i, i, T::from_real(shift));
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re()).fold(0.0, f64::max)
    }

    /// `y = A x` using the Hermitian symmetry.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bandwidth)..=i {
                let a = self.get(i, j);
                y[i] += a * x[j];
                if j != i {
                    y[j] += a.conj() * x[i];
                }
            }
        }
        y
    }

    /// `A = L L^H`, or `None` when a pivot is not positive.
    pub fn cholesky(&self) -> Option<BandedCholesky<T>> {
        let b = self.bandwidth;
        let mut l = BandedHermitian::<T>::zeros(self.n, b);
        for i in 0..self.n {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let mut s = self.get(i, j);
                for k in lo.max(j.saturating_sub(b))..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                if i == j {
                    let d = s.re();
                    if !(d > 0.0) || !d.is_finite() {
                        return None;
                    }
                    let k = l.idx(i, i);
                    l.data[k] = T::from_real(d.sqrt());
                } else {
                    let k = l.idx(i, j);
                    l.data[k] = s / l.get(j, j);
                }
            }
        }
        Some(BandedCholesky { l })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    l: BandedHermitian<T>,
}

impl<T: Scalar> BandedCholesky<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let (n, b) = (self.l.n, self.l.bandwidth);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + b + 1).min(n) {
                s -= self.l.get(k, i).conj() * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        y
    }

    /// `(max L_ii / min L_ii)^2`, a lower estimate of the 2-norm condition
    /// number.
    pub fn condition_estimate(&self) -> f64 {
        let (lo, hi) = (0..self.l.n)
            .map(|i| self.l.get(i, i).re())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
                (lo.min(d), hi.max(d))
            });
        (hi / lo).powi(2)
    }
}

/// Solves the dense system `A x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `n x n`.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() <= 1e-300 || a[pivot * n + col].abs() < scale * 1e-16 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i * n + k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Some(x)
}

/// Least-squares solution of the complex overdetermined system
/// `sum_k basis[k][t] x_k = target[t]` via the normal equations.
pub fn least_squares_complex(
    basis: &[Vec<Complex64>],
    target: &[Complex64],
) -> Option<Vec<Complex64>> {
    let m = basis.len();
    let mut gram = BandedHermitian::<Complex64>::zeros(m, m.saturating_sub(1));
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        for j in 0..=i {
            let s: Complex64 = basis[i]
                .iter()
                .zip(&basis[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            gram.add_lower(i, j, s);
        }
        rhs[i] = basis[i].iter().zip(target).map(|(a, y)| a.conj() * y).sum();
    }
    Some(gram.cholesky()?.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_real_solve() {
        // tridiagonal 2, -1
        let n = 6;
        let mut a = BandedHermitian::<f64>::zeros(n, 1);
        for i in 0..n {
            a.add_lower(i, i, 2.0);
            if i > 0 {
                a.add_lower(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let b = a.mul_vec(&x);
        let sol = a.cholesky().unwrap().solve(&b);
        for (u, v) in sol.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn banded_complex_solve() {
        let n = 7;
        let b = 2;
        let mut a = BandedHermitian::<Complex64>::zeros(n, b);
        for i in 0..n {
            a.add_lower(i, i, Complex64::new(6.0 + i as f64, 0.0));
            for j in i.saturating_sub(b)..i {
                a.add_lower(i, j, Complex64::new(0.5, (i + j) as f64 * 0.1));
            }
        }
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(i as f64, -(i as f64) / 3.0))
            .collect();
        let rhs = a.mul_vec(&x);
        let chol = a.cholesky().unwrap();
        let sol = chol.solve(&rhs);
        for (u, v) in sol.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
        assert!(chol.condition_estimate() >= 1.0);
    }

    #[test]
    fn indefinite_rejected() {
        let mut a = BandedHermitian::<f64>::zeros(2, 1);
        a.add_lower(0, 0, 1.0);
        a.add_lower(1, 0, 2.0);
        a.add_lower(1, 1, 1.0);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn dense_solve() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = solve_dense(a, vec![5.0, 3.0, 4.0]).unwrap();
        let expected = [1.0, 2.0, 1.0];
        for (u, v) in x.iter().zip(expected) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());
    }
}
