//! The discrete linearized operator `L w = sum_ab A_ab d_a d_b w` with
//! identity rows on the Dirichlet faces, and a fast constant-coefficient
//! preconditioner.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::form::coefficient_count;
use super::grid::{GridGeometry, MAX_AXES};
use crate::linalg::LinearOperator;

const NODE_CHUNK: usize = 1024;

/// Second-order operator with per-node coefficients.
pub struct EllipticOperator {
    geometry: Arc<GridGeometry>,
    /// `A_ab`, upper triangle per node; boundary entries are ignored.
    coeffs: Vec<f64>,
    precond: FourierPreconditioner,
}

impl EllipticOperator {
    pub fn new(geometry: &Arc<GridGeometry>, coeffs: Vec<f64>) -> Self {
        let k = coefficient_count(geometry.axes());
        assert_eq!(coeffs.len(), geometry.len() * k);
        let precond = FourierPreconditioner::new(geometry, &coeffs);
        Self {
            geometry: Arc::clone(geometry),
            coeffs,
            precond,
        }
    }

    /// Constant coefficients `A = c I` at every node.
    pub fn scaled_laplacian(geometry: &Arc<GridGeometry>, c: f64) -> Self {
        let dims = geometry.axes();
        let mut node = Vec::with_capacity(coefficient_count(dims));
        for a in 0..dims {
            for b in a..dims {
                node.push(if a == b { c } else { 0.0 });
            }
        }
        let coeffs = node.iter().copied().cycle().take(node.len() * geometry.len()).collect();
        Self::new(geometry, coeffs)
    }

    pub fn geometry(&self) -> &Arc<GridGeometry> {
        &self.geometry
    }

    /// `L w` at an interior node, using whatever values `w` holds on the faces.
    #[inline]
    pub fn apply_at(&self, w: &[f64], idx: usize) -> f64 {
        let geom = &*self.geometry;
        let dims = geom.axes();
        let k = coefficient_count(dims);
        let a = &self.coeffs[idx * k..(idx + 1) * k];
        let nb = geom.neighbours(idx);
        let inv_h2 = 1.0 / (geom.h() * geom.h());
        let w0 = w[idx];
        let at = |d: isize| w[(idx as isize + d) as usize];
        let mut acc = 0.0;
        let mut t = 0;
        for r in 0..dims {
            for c in r..dims {
                let coeff = a[t];
                t += 1;
                if coeff == 0.0 {
                    continue;
                }
                if r == c {
                    acc += coeff * (at(nb.plus[r]) - 2.0 * w0 + at(nb.minus[r]));
                } else {
                    // 2 A_rc times the 4-point mixed difference over 4 h^2
                    acc += 0.5
                        * coeff
                        * (at(nb.plus[r] + nb.plus[c]) - at(nb.plus[r] + nb.minus[c]) - at(nb.minus[r] + nb.plus[c])
                            + at(nb.minus[r] + nb.minus[c]));
                }
            }
        }
        acc * inv_h2
    }

    /// `L w` at interior nodes, zero on the faces.
    pub fn apply_interior(&self, w: &[f64], out: &mut [f64]) {
        let geom = &*self.geometry;
        out.par_chunks_mut(NODE_CHUNK).enumerate().for_each(|(c, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                let idx = c * NODE_CHUNK + o;
                *slot = if geom.is_boundary(idx) { 0.0 } else { self.apply_at(w, idx) };
            }
        });
    }
}

impl LinearOperator<f64> for EllipticOperator {
    fn len(&self) -> usize {
        self.geometry.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let geom = &*self.geometry;
        y.par_chunks_mut(NODE_CHUNK).enumerate().for_each(|(c, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                let idx = c * NODE_CHUNK + o;
                *slot = if geom.is_boundary(idx) { x[idx] } else { self.apply_at(x, idx) };
            }
        });
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        self.precond.solve(r, z);
    }
}

/// Exact inverse of `sum_a c_a d_a d_a` with `c_a` the mean diagonal
/// coefficient: discrete Fourier transform in the periodic axes and a
/// tridiagonal solve along the Dirichlet axis.
struct FourierPreconditioner {
    geometry: Arc<GridGeometry>,
    c: [f64; MAX_AXES],
    forward: Vec<Option<Arc<dyn Fft<f64>>>>,
    inverse: Vec<Option<Arc<dyn Fft<f64>>>>,
}

impl FourierPreconditioner {
    fn new(geometry: &Arc<GridGeometry>, coeffs: &[f64]) -> Self {
        let dims = geometry.axes();
        let k = coefficient_count(dims);
        let mut c = [0.0; MAX_AXES];
        let mut count = 0usize;
        for idx in geometry.interior_nodes() {
            let a = &coeffs[idx * k..(idx + 1) * k];
            let mut t = 0;
            for r in 0..dims {
                c[r] += a[t];
                t += dims - r;
            }
            count += 1;
        }
        for v in c.iter_mut().take(dims) {
            *v /= count.max(1) as f64;
        }
        let dir = geometry.dirichlet_axis();
        // a vanishing Dirichlet coefficient would make the line solves singular
        let floor = 1e-12 * c[..dims].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        c[dir] = c[dir].max(floor);
        let mut planner = FftPlanner::new();
        let mut forward = Vec::new();
        let mut inverse = Vec::new();
        for a in 0..dims {
            if a == dir {
                forward.push(None);
                inverse.push(None);
            } else {
                forward.push(Some(planner.plan_fft_forward(geometry.sizes()[a])));
                inverse.push(Some(planner.plan_fft_inverse(geometry.sizes()[a])));
            }
        }
        Self {
            geometry: Arc::clone(geometry),
            c,
            forward,
            inverse,
        }
    }

    fn transform_axis(&self, data: &mut [Complex<f64>], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let sizes = self.geometry.sizes();
        let len = sizes[axis];
        let inner = self.geometry.strides()[axis];
        let outer = data.len() / (len * inner);
        let mut line = vec![Complex::new(0.0, 0.0); len];
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * len * inner + i;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * inner];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * inner] = *v;
                }
            }
        }
    }

    fn solve(&self, r: &[f64], z: &mut [f64]) {
        let geom = &*self.geometry;
        let dims = geom.axes();
        let dir = geom.dirichlet_axis();
        let n = geom.resolution();
        let h2 = geom.h() * geom.h();
        let mut data: Vec<Complex<f64>> = (0..r.len())
            .map(|i| Complex::new(if geom.is_boundary(i) { 0.0 } else { r[i] }, 0.0))
            .collect();
        for a in 0..dims {
            if let Some(fft) = &self.forward[a] {
                self.transform_axis(&mut data, a, fft);
            }
        }

        // Tridiagonal solve along every Dirichlet line for its wave vector.
        let stride = geom.strides()[dir];
        let size = geom.sizes()[dir];
        let off = self.c[dir] / h2;
        let mut cp = vec![0.0; size];
        let mut dp = vec![Complex::new(0.0, 0.0); size];
        for start in 0..data.len() {
            if (start / stride) % size != 0 {
                continue;
            }
            let coords = geom.coords(start);
            let mut mu = 0.0;
            for a in 0..dims {
                if a != dir {
                    let s = (std::f64::consts::PI * coords[a] as f64 / geom.sizes()[a] as f64).sin();
                    mu += self.c[a] * 4.0 * s * s / h2;
                }
            }
            let diag = -2.0 * off - mu;
            // unknowns j = 1..n-1, zero at j = 0 and j = n
            for j in 1..n {
                let rhs = data[start + j * stride];
                if j == 1 {
                    cp[j] = off / diag;
                    dp[j] = rhs / diag;
                } else {
                    let m = diag - off * cp[j - 1];
                    cp[j] = off / m;
                    dp[j] = (rhs - dp[j - 1] * off) / m;
                }
            }
            let mut next = Complex::new(0.0, 0.0);
            for j in (1..n).rev() {
                let v = dp[j] - next * cp[j];
                data[start + j * stride] = v;
                next = v;
            }
        }

        let mut scale = 1.0;
        for a in 0..dims {
            if let Some(fft) = &self.inverse[a] {
                self.transform_axis(&mut data, a, fft);
                scale /= geom.sizes()[a] as f64;
            }
        }
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = if geom.is_boundary(i) { r[i] } else { data[i].re * scale };
        }
    }
}
