//! Preconditioned BiCGSTAB for the nonsymmetric operators produced by
//! linearizing the discrete equation.
//!
//! Reductions are computed over fixed-size chunks and summed in order, so the
//! result does not depend on how many worker threads run the chunks.

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrylovError {
    #[error("BiCGSTAB breakdown at iteration {iteration} (relative residual {residual:e})")]
    Breakdown { iteration: usize, residual: f64 },
    #[error("BiCGSTAB reached {iterations} iterations with relative residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Square operator `y = A x` with a left preconditioner `z ~ A^{-1} r`.
pub trait LinearOperator<T: Scalar>: Sync {
    fn len(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    fn precondition(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let partial: Vec<T> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p * q).sum::<T>())
        .collect();
    partial.into_iter().sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from the contents of `x`; stops once
/// `|b - A x| <= rtol * |b|`.
pub fn bicgstab<T: Scalar, A: LinearOperator<T>>(
    op: &A,
    b: &[T],
    x: &mut [T],
    rtol: T,
    max_iter: usize,
) -> Result<KrylovStats, KrylovError> {
    let n = op.len();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let b_norm = norm(b);
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(KrylovStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let mut r = vec![T::zero(); n];
    op.apply(x, &mut r);
    r.par_iter_mut().zip(b).for_each(|(ri, &bi)| *ri = bi - *ri);
    let r_hat = r.clone();
    let mut p = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut p_hat = vec![T::zero(); n];
    let mut s_hat = vec![T::zero(); n];

    let mut rho_old = T::one();
    let mut alpha = T::one();
    let mut omega = T::one();
    let mut rel = (norm(&r) / b_norm).to_f64_lossy();
    if rel <= rtol.to_f64_lossy() {
        return Ok(KrylovStats {
            iterations: 0,
            relative_residual: rel,
        });
    }

    for it in 1..=max_iter {
        let rho = dot(&r_hat, &r);
        if rho == T::zero() || !rho.is_finite() {
            return Err(KrylovError::Breakdown {
                iteration: it,
                residual: rel,
            });
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            let beta = (rho / rho_old) * (alpha / omega);
            p.par_iter_mut()
                .zip(&r)
                .zip(&v)
                .for_each(|((pi, &ri), &vi)| *pi = ri + beta * (*pi - omega * vi));
        }
        op.precondition(&p, &mut p_hat);
        op.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() || !rv.is_finite() {
            return Err(KrylovError::Breakdown {
                iteration: it,
                residual: rel,
            });
        }
        alpha = rho / rv;
        s.par_iter_mut()
            .zip(&r)
            .zip(&v)
            .for_each(|((si, &ri), &vi)| *si = ri - alpha * vi);
        let s_rel = (norm(&s) / b_norm).to_f64_lossy();
        if s_rel <= rtol.to_f64_lossy() {
            x.par_iter_mut()
                .zip(&p_hat)
                .for_each(|(xi, &pi)| *xi += alpha * pi);
            return Ok(KrylovStats {
                iterations: it,
                relative_residual: s_rel,
            });
        }
        op.precondition(&s, &mut s_hat);
        op.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == T::zero() {
            return Err(KrylovError::Breakdown {
                iteration: it,
                residual: rel,
            });
        }
        omega = dot(&t, &s) / tt;
        x.par_iter_mut()
            .zip(&p_hat)
            .zip(&s_hat)
            .for_each(|((xi, &pi), &si)| *xi += alpha * pi + omega * si);
        r.par_iter_mut()
            .zip(&s)
            .zip(&t)
            .for_each(|((ri, &si), &ti)| *ri = si - omega * ti);
        rel = (norm(&r) / b_norm).to_f64_lossy();
        if rel <= rtol.to_f64_lossy() {
            return Ok(KrylovStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        if omega == T::zero() {
            return Err(KrylovError::Breakdown {
                iteration: it,
                residual: rel,
            });
        }
        rho_old = rho;
    }
    Err(KrylovError::MaxIterations {
        iterations: max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1-D Dirichlet Laplacian plus a first-order term (nonsymmetric).
    struct Convection {
        n: usize,
        c: f64,
    }

    impl LinearOperator<f64> for Convection {
        fn len(&self) -> usize {
            self.n
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..self.n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < self.n { x[i + 1] } else { 0.0 };
                y[i] = 2.0 * x[i] - l - r + self.c * (r - l);
            }
        }
        fn precondition(&self, r: &[f64], z: &mut [f64]) {
            for (zi, ri) in z.iter_mut().zip(r) {
                *zi = ri / 2.0;
            }
        }
    }

    #[test]
    fn solves_nonsymmetric_tridiagonal() {
        let op = Convection { n: 200, c: 0.3 };
        let exact: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut b = vec![0.0; 200];
        op.apply(&exact, &mut b);
        let mut x = vec![0.0; 200];
        let stats = bicgstab(&op, &b, &mut x, 1e-12, 2000).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        for (a, e) in x.iter().zip(&exact) {
            assert!((a - e).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let op = Convection { n: 10, c: 0.0 };
        let mut x = vec![1.0; 10];
        let stats = bicgstab(&op, &[0.0; 10], &mut x, 1e-10, 10).unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reports_iteration_cap() {
        let op = Convection { n: 400, c: 0.0 };
        let b = vec![1.0; 400];
        let mut x = vec![0.0; 400];
        assert!(matches!(
            bicgstab(&op, &b, &mut x, 1e-14, 2),
            Err(KrylovError::MaxIterations { .. })
        ));
    }
}
