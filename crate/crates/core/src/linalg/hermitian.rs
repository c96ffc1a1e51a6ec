use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Dense `n x n` Hermitian matrix stored row-major.
///
/// Every mutator writes both `(i, j)` and `(j, i)`, so the stored matrix is
/// Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

/// Ascending eigenvalues with unit eigenvectors; column `p` of `vectors`
/// (row-major, `n x n`) pairs with `values[p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Complex<T>>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Component `i` of eigenvector `p`.
    #[inline]
    pub fn vector(&self, p: usize, i: usize) -> Complex<T> {
        self.vectors[i * self.values.len() + p]
    }
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diagonal(&vec![T::one(); n])
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set_diagonal(i, d);
        }
        m
    }

    /// Builds from the upper triangle produced by `entry(i, j)` for `i <= j`.
    /// Imaginary parts of diagonal entries are discarded.
    pub fn from_upper<F>(n: usize, mut entry: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex<T>,
    {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set_diagonal(i, entry(i, i).re);
            for j in i + 1..n {
                m.set(i, j, entry(i, j));
            }
        }
        m
    }

    /// Real symmetric matrix embedded as Hermitian.
    pub fn from_real_symmetric(n: usize, rows: &[T]) -> Self {
        assert_eq!(rows.len(), n * n);
        Self::from_upper(n, |i, j| Complex::new(rows[i * n + j], T::zero()))
    }

    #[inline]
    /// Wraps row-major entries after checking Hermitian symmetry exactly.
    pub fn from_row_major(n: usize, data: Vec<Complex<T>>) -> Option<Self> {
        let m = Self { n, data };
        (m.data.len() == n * n && m.is_hermitian(T::zero())).then_some(m)
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` to `v` and `(j, i)` to `conj(v)`. Panics on a diagonal
    /// entry with nonzero imaginary part.
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        if i == j {
            assert!(v.im == T::zero(), "Hermitian diagonal must be real");
        }
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v.conj();
    }

    pub fn set_diagonal(&mut self, i: usize, v: T) {
        self.data[i * self.n + i] = Complex::new(v, T::zero());
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `Re tr(self * other)`; for Hermitian arguments this is the real
    /// Frobenius pairing.
    pub fn trace_product(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) * other.get(j, i)).re;
            }
        }
        acc
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol)
        })
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>, EigenError> {
        Ok(self.jacobi(false)?.values)
    }

    pub fn eigen(&self) -> Result<EigenDecomposition<T>, EigenError> {
        self.jacobi(true)
    }

    /// Cyclic complex Jacobi. Each rotation first removes the phase of the
    /// pivot with a diagonal unitary, then applies the real symmetric
    /// rotation that annihilates it.
    fn jacobi(&self, want_vectors: bool) -> Result<EigenDecomposition<T>, EigenError> {
        const MAX_SWEEPS: usize = 64;
        let n = self.n;
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(EigenError::NonFinite);
        }
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut a = self.data.clone();
        let mut v = vec![zero; if want_vectors { n * n } else { 0 }];
        if want_vectors {
            for i in 0..n {
                v[i * n + i] = one;
            }
        }

        let scale = self.frobenius_norm();
        let tiny = T::epsilon() * T::epsilon() * scale * scale;
        let off = |a: &[Complex<T>]| -> T {
            let mut s = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    s += a[i * n + j].norm_sqr();
                }
            }
            s
        };

        let mut sweeps = 0;
        loop {
            let off_sq = off(&a);
            if off_sq <= tiny || off_sq == T::zero() {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(EigenError::NoConvergence {
                    sweeps,
                    off_norm: off_sq.sqrt().to_f64_lossy(),
                });
            }
            sweeps += 1;
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    let mag = apq.norm();
                    if mag == T::zero() {
                        continue;
                    }
                    let app = a[p * n + p].re;
                    let aqq = a[q * n + q].re;
                    // Pivot already negligible against both diagonal entries.
                    if sweeps > 3
                        && app.abs() + mag == app.abs()
                        && aqq.abs() + mag == aqq.abs()
                    {
                        a[p * n + q] = zero;
                        a[q * n + p] = zero;
                        continue;
                    }
                    let phase = apq / mag;
                    let tau = (aqq - app) / (T::lit(2.0) * mag);
                    let t = if tau >= T::zero() {
                        T::one() / (tau + (T::one() + tau * tau).sqrt())
                    } else {
                        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    // U = [[c, s], [-s conj(e), c conj(e)]] on rows/cols p, q.
                    let upp = Complex::new(c, T::zero());
                    let upq = Complex::new(s, T::zero());
                    let uqp = -phase.conj() * s;
                    let uqq = phase.conj() * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = akp * upp + akq * uqp;
                        a[k * n + q] = akp * upq + akq * uqq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = upp.conj() * apk + uqp.conj() * aqk;
                        a[q * n + k] = upq.conj() * apk + uqq.conj() * aqk;
                    }
                    a[p * n + q] = zero;
                    a[q * n + p] = zero;
                    a[p * n + p] = Complex::new(app - t * mag, T::zero());
                    a[q * n + q] = Complex::new(aqq + t * mag, T::zero());
                    if want_vectors {
                        for k in 0..n {
                            let vkp = v[k * n + p];
                            let vkq = v[k * n + q];
                            v[k * n + p] = vkp * upp + vkq * uqp;
                            v[k * n + q] = vkp * upq + vkq * uqq;
                        }
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[i * n + i].re.partial_cmp(&a[j * n + j].re).unwrap());
        let values = order.iter().map(|&i| a[i * n + i].re).collect();
        let vectors = if want_vectors {
            let mut sorted = vec![zero; n * n];
            for (new, &old) in order.iter().enumerate() {
                for k in 0..n {
                    sorted[k * n + new] = v[k * n + old];
                }
            }
            sorted
        } else {
            Vec::new()
        };
        Ok(EigenDecomposition { values, vectors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn reflection_matrix() {
        let m = HermitianMatrix::from_upper(2, |i, j| if i == j { c(0.0, 0.0) } else { c(1.0, 0.0) });
        let ev = m.eigenvalues().unwrap();
        assert_relative_eq!(ev[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = HermitianMatrix::from_upper(2, |i, j| match (i, j) {
            (0, 0) => c(2.0, 0.0),
            (1, 1) => c(2.0, 0.0),
            _ => c(1.0, 0.0),
        });
        let ev = m.eigenvalues().unwrap();
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn complex_off_diagonal_eigenpairs() {
        let m = HermitianMatrix::from_upper(3, |i, j| match (i, j) {
            (0, 0) => c(1.0, 0.0),
            (1, 1) => c(-2.0, 0.0),
            (2, 2) => c(0.5, 0.0),
            (0, 1) => c(0.3, -0.7),
            (0, 2) => c(0.0, 1.1),
            _ => c(-0.4, 0.2),
        });
        let e = m.eigen().unwrap();
        for p in 0..3 {
            let v: Vec<_> = (0..3).map(|i| e.vector(p, i)).collect();
            let av = m.mul_vec(&v);
            for i in 0..3 {
                assert!((av[i] - v[i] * e.values[p]).norm() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert_relative_eq!(e.values.iter().sum::<f64>(), m.trace(), epsilon = 1e-13);
    }

    #[test]
    fn diagonal_is_sorted() {
        let m = HermitianMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(m.eigenvalues().unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_nan() {
        let m = HermitianMatrix::from_real_diagonal(&[f64::NAN, 1.0]);
        assert_eq!(m.eigenvalues(), Err(EigenError::NonFinite));
    }

    #[test]
    fn single_precision() {
        let m = HermitianMatrix::<f32>::from_real_symmetric(2, &[2.0, 1.0, 1.0, 2.0]);
        let ev = m.eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-6 && (ev[1] - 3.0).abs() < 1e-6);
    }
}
