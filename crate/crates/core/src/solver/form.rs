//! Form fields `g = chi + i dd-bar u` (complex model) or `g = chi + D^2 u`
//! (real model), their eigenvalues and the spectral linearization.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use super::grid::{GridGeometry, Model, ScalarField, MAX_AXES};
use super::stencil::{self, AxisMatrix};
use super::SolverError;
use crate::cone::{Lambda, SymmetricFunction};
use crate::linalg::HermitianMatrix;

/// Eigenvalues closer than `CLUSTER_TOL (1 + |lambda|)` share one averaged
/// derivative in [`spectral_derivative`].
pub const CLUSTER_TOL: f64 = 1e-8;

/// One `m x m` Hermitian matrix per node, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianFormField {
    geometry: Arc<GridGeometry>,
    m: usize,
    data: Vec<Complex<f64>>,
}

impl HermitianFormField {
    pub fn constant(geometry: &Arc<GridGeometry>, value: &HermitianMatrix<f64>) -> Result<Self, SolverError> {
        let m = geometry.form_dim();
        if value.dim() != m {
            return Err(SolverError::Geometry(format!(
                "form has size {}, model needs {m}",
                value.dim()
            )));
        }
        if let Model::Real { .. } = geometry.model() {
            if value.entries().iter().any(|z| z.im != 0.0) {
                return Err(SolverError::Geometry("real model needs a real symmetric form".into()));
            }
        }
        let mut data = Vec::with_capacity(geometry.len() * m * m);
        for _ in 0..geometry.len() {
            data.extend_from_slice(value.entries());
        }
        Ok(Self {
            geometry: Arc::clone(geometry),
            m,
            data,
        })
    }

    pub fn geometry(&self) -> &Arc<GridGeometry> {
        &self.geometry
    }

    pub fn form_dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, idx: usize) -> HermitianMatrix<f64> {
        let mm = self.m * self.m;
        HermitianMatrix::from_row_major(self.m, self.data[idx * mm..(idx + 1) * mm].to_vec())
            .expect("stored forms are Hermitian")
    }

    pub fn set(&mut self, idx: usize, value: &HermitianMatrix<f64>) {
        let mm = self.m * self.m;
        self.data[idx * mm..(idx + 1) * mm].copy_from_slice(value.entries());
    }

    pub fn trace(&self) -> ScalarField {
        let mm = self.m * self.m;
        let values = self
            .data
            .chunks(mm)
            .map(|c| (0..self.m).map(|i| c[i * self.m + i].re).sum())
            .collect();
        ScalarField::from_values(&self.geometry, values).expect("one value per node")
    }
}

/// Parses `identity`, `scaled:c` or `diag:c1:...:cm`.
pub fn parse_chi(text: &str, m: usize) -> Result<HermitianMatrix<f64>, SolverError> {
    let bad = || SolverError::Parse(format!("unknown chi preset {text:?}"));
    let parts: Vec<&str> = text.trim().split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        ["identity"] => Ok(HermitianMatrix::identity(m)),
        ["scaled", c] => Ok(HermitianMatrix::identity(m).scale(num(c)?)),
        ["diag", rest @ ..] if rest.len() == m => {
            let d: Result<Vec<f64>, _> = rest.iter().map(|s| num(s)).collect();
            Ok(HermitianMatrix::from_real_diagonal(&d?))
        }
        _ => Err(bad()),
    }
}

/// Maps a real Hessian to the model's form matrix: the complex Hessian
/// `u_{i j-bar} = (1/4)[(u_{xi xj} + u_{yi yj}) + i (u_{xi yj} - u_{yi xj})]`
/// or the real Hessian itself.
pub fn form_of_hessian(model: Model, s: &AxisMatrix) -> HermitianMatrix<f64> {
    match model {
        Model::Complex { n } => HermitianMatrix::from_upper(n, |i, j| {
            let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            Complex::new(
                0.25 * (s[xi][xj] + s[yi][yj]),
                0.25 * (s[xi][yj] - s[yi][xj]),
            )
        }),
        Model::Real { d } => HermitianMatrix::from_upper(d, |a, b| Complex::new(s[a][b], 0.0)),
    }
}

/// `g = chi + hessian-form(u)` at one node.
pub fn node_form(chi: &HermitianFormField, u: &ScalarField, idx: usize) -> HermitianMatrix<f64> {
    let geom = u.geometry();
    let s = stencil::hessian(geom, u.values(), idx);
    chi.at(idx).add(&form_of_hessian(geom.model(), &s))
}

fn check_same_geometry(a: &Arc<GridGeometry>, b: &Arc<GridGeometry>) -> Result<(), SolverError> {
    if a == b {
        Ok(())
    } else {
        Err(SolverError::Geometry("fields live on different geometries".into()))
    }
}

/// `g = chi + i dd-bar u` at every node (one-sided normal stencils on the faces).
pub fn complex_hessian(u: &ScalarField, chi: &HermitianFormField) -> Result<HermitianFormField, SolverError> {
    if !matches!(u.geometry().model(), Model::Complex { .. }) {
        return Err(SolverError::Geometry("complex Hessian needs the complex model".into()));
    }
    form_field(u, chi)
}

/// `g[u]` for whichever model the geometry carries.
pub fn form_field(u: &ScalarField, chi: &HermitianFormField) -> Result<HermitianFormField, SolverError> {
    check_same_geometry(u.geometry(), chi.geometry())?;
    let mut out = chi.clone();
    let mm = chi.m * chi.m;
    out.data
        .par_chunks_mut(mm)
        .enumerate()
        .for_each(|(idx, slot)| slot.copy_from_slice(node_form(chi, u, idx).entries()));
    Ok(out)
}

/// Ascending eigenvalues of every node's form.
pub fn eigen_field(g: &HermitianFormField) -> Result<Vec<Lambda<f64>>, SolverError> {
    (0..g.geometry.len())
        .into_par_iter()
        .map(|idx| {
            g.at(idx)
                .eigenvalues()
                .map(Lambda::new)
                .map_err(|e| SolverError::Eigen {
                    node: node_label(&g.geometry, idx),
                    source: e,
                })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub(crate) fn node_label(geom: &GridGeometry, idx: usize) -> String {
    let c = geom.coords(idx);
    let parts: Vec<String> = (0..geom.axes()).map(|a| c[a].to_string()).collect();
    format!("({})", parts.join(","))
}

/// `f(lambda(g))` and the coefficient matrix `F^{i j-bar} = sum_p f_p v_p v_p^*`.
///
/// Eigenvalues within [`CLUSTER_TOL`] of their neighbour are grouped and the
/// group shares the mean of its `f_p`, which keeps the result independent of
/// the basis chosen inside a (nearly) repeated eigenspace.
pub fn spectral_derivative(
    fun: &SymmetricFunction,
    g: &HermitianMatrix<f64>,
) -> Result<(f64, HermitianMatrix<f64>), String> {
    let eig = g.eigen().map_err(|e| e.to_string())?;
    let lambda = Lambda::new(eig.values.clone());
    let (value, grad) = fun.eval_with_grad(&lambda).map_err(|_| {
        format!("eigenvalues {:?} are outside the cone", eig.values)
    })?;
    let mut fp = grad.values().to_vec();
    let m = fp.len();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && eig.values[end] - eig.values[end - 1] <= CLUSTER_TOL * (1.0 + eig.values[end - 1].abs()) {
            end += 1;
        }
        if end - start > 1 {
            let mean = fp[start..end].iter().sum::<f64>() / (end - start) as f64;
            fp[start..end].iter_mut().for_each(|v| *v = mean);
        }
        start = end;
    }
    let coeff = HermitianMatrix::from_upper(m, |i, j| {
        (0..m)
            .map(|p| eig.vector(p, i) * eig.vector(p, j).conj() * fp[p])
            .sum()
    });
    Ok((value, coeff))
}

/// Number of stored operator coefficients per node for `dims` axes.
pub fn coefficient_count(dims: usize) -> usize {
    dims * (dims + 1) / 2
}

/// Real second-order coefficients `A_ab` (upper triangle, row-major) with
/// `Re tr(G H(S)) = sum_ab A_ab S_ab`.
pub fn real_coefficients(model: Model, g: &HermitianMatrix<f64>, out: &mut [f64]) {
    let dims = model.axes();
    let mut a = [[0.0; MAX_AXES]; MAX_AXES];
    match model {
        Model::Complex { n } => {
            for i in 0..n {
                for j in 0..n {
                    let gij = g.get(i, j);
                    let (p, q) = (0.25 * gij.re, 0.25 * gij.im);
                    a[2 * i][2 * j] = p;
                    a[2 * i + 1][2 * j + 1] = p;
                    a[2 * i][2 * j + 1] = q;
                    a[2 * i + 1][2 * j] = -q;
                }
            }
        }
        Model::Real { d } => {
            for i in 0..d {
                for j in 0..d {
                    a[i][j] = g.get(i, j).re;
                }
            }
        }
    }
    let mut k = 0;
    for r in 0..dims {
        for c in r..dims {
            out[k] = a[r][c];
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::arrowhead::ArrowheadSpec;
    use crate::cone::Kind;
    use crate::solver::Expr;

    fn identity_chi(geom: &Arc<GridGeometry>) -> HermitianFormField {
        HermitianFormField::constant(geom, &HermitianMatrix::identity(geom.form_dim())).unwrap()
    }

    /// A node whose stencil never touches a periodic seam.
    fn middle(geom: &GridGeometry) -> usize {
        let c: Vec<usize> = geom.sizes().iter().map(|s| s / 2).collect();
        geom.index(&c)
    }

    #[test]
    fn zero_field_gives_chi() {
        let geom = GridGeometry::complex(2, 6).unwrap();
        let chi = HermitianFormField::constant(&geom, &parse_chi("diag:2:3", 2).unwrap()).unwrap();
        let g = complex_hessian(&ScalarField::zeros(&geom), &chi).unwrap();
        assert_eq!(g, chi);
    }

    #[test]
    fn modulus_squared_and_pluriharmonic_quadratics() {
        let geom = GridGeometry::complex(2, 8).unwrap();
        let chi = identity_chi(&geom);
        let idx = middle(&geom);
        let z1sq = Expr::parse("sq:x1:1+sq:y1:1", &geom).unwrap().sample(&geom);
        let g = complex_hessian(&z1sq, &chi).unwrap().at(idx);
        assert_relative_eq!(g.get(0, 0).re, 2.0, epsilon = 1e-9);
        assert_relative_eq!(g.get(1, 1).re, 1.0, epsilon = 1e-9);
        assert!(g.get(0, 1).norm() < 1e-9);
        let re_z1sq = Expr::parse("sq:x1:1+sq:y1:-1", &geom).unwrap().sample(&geom);
        let g = complex_hessian(&re_z1sq, &chi).unwrap().at(idx);
        assert!(g.add(&HermitianMatrix::identity(2).scale(-1.0)).frobenius_norm() < 1e-9);
    }

    #[test]
    fn cross_term_of_complex_hessian() {
        // u = x1 y2: u_{1 2-bar} = (1/4)(u_{x1 y2}) i = i/4
        let geom = GridGeometry::complex(2, 8).unwrap();
        let u = ScalarField::from_fn(&geom, |p| p[0] * p[3]);
        let h = form_of_hessian(geom.model(), &stencil::hessian(&geom, u.values(), middle(&geom)));
        assert_relative_eq!(h.get(0, 1).im, 0.25, epsilon = 1e-9);
        assert_relative_eq!(h.get(0, 1).re, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn eigen_field_examples() {
        let geom = GridGeometry::complex(2, 4).unwrap();
        let m = HermitianMatrix::from_real_symmetric(2, &[2.0, 1.0, 1.0, 2.0]);
        let g = HermitianFormField::constant(&geom, &m).unwrap();
        let eig = eigen_field(&g).unwrap();
        assert_eq!(eig.len(), geom.len());
        assert_relative_eq!(eig[5].values()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(eig[5].values()[1], 3.0, epsilon = 1e-12);
        let d = HermitianFormField::constant(&geom, &HermitianMatrix::from_real_diagonal(&[4.0, -1.0])).unwrap();
        assert_eq!(eigen_field(&d).unwrap()[0].values(), &[-1.0, 4.0]);
    }

    #[test]
    fn eigen_field_agrees_with_arrowhead_module() {
        let geom = GridGeometry::complex(3, 3).unwrap();
        let spec = ArrowheadSpec::new(
            vec![1.5, -2.0],
            vec![Complex::new(0.3, -0.4), Complex::new(1.0, 2.0)],
            4.0,
        )
        .unwrap();
        let g = HermitianFormField::constant(&geom, &spec.assemble()).unwrap();
        let ours = eigen_field(&g).unwrap();
        let theirs = spec.eigenvalues().unwrap();
        for (a, b) in ours[7].values().iter().zip(theirs.values.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn linearization_examples() {
        let sigma1 = SymmetricFunction::sigma1(2);
        let m = HermitianMatrix::from_upper(2, |i, j| if i == j { Complex::new(1.0 + i as f64, 0.0) } else { Complex::new(0.3, 0.2) });
        let (_, c) = spectral_derivative(&sigma1, &m).unwrap();
        assert!(c.add(&HermitianMatrix::identity(2).scale(-1.0)).frobenius_norm() < 1e-12);
        let ma = SymmetricFunction::monge_ampere(2);
        let (v, c) = spectral_derivative(&ma, &HermitianMatrix::from_real_diagonal(&[1.0, 4.0])).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);
        assert_relative_eq!(c.get(0, 0).re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.get(1, 1).re, 0.25, epsilon = 1e-14);
        assert!(spectral_derivative(&ma, &HermitianMatrix::from_real_diagonal(&[-1.0, 4.0])).is_err());
    }

    #[test]
    fn directional_derivative_and_ellipticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let kinds = [
            SymmetricFunction::monge_ampere(3),
            SymmetricFunction::sigma1(3),
            SymmetricFunction::new(Kind::SigmaRoot { k: 2 }, 3).unwrap(),
            SymmetricFunction::new(Kind::Quotient { k: 1, l: 3 }, 3).unwrap(),
        ];
        for fun in kinds {
            for trial in 0..50 {
                let base = HermitianMatrix::from_upper(3, |i, j| {
                    if i == j {
                        Complex::new(rng.random_range(1.0..4.0), 0.0)
                    } else {
                        Complex::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4))
                    }
                });
                // exercise the cluster branch on some trials
                let base = if trial % 5 == 0 { HermitianMatrix::identity(3).scale(2.0) } else { base };
                let e = HermitianMatrix::from_upper(3, |i, j| {
                    if i == j {
                        Complex::new(rng.random_range(-1.0..1.0), 0.0)
                    } else {
                        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    }
                });
                let s = 1e-5;
                let (f0, c) = spectral_derivative(&fun, &base).unwrap();
                let (fp, _) = spectral_derivative(&fun, &base.add(&e.scale(s))).unwrap();
                let (fm, _) = spectral_derivative(&fun, &base.add(&e.scale(-s))).unwrap();
                let fd = (fp - fm) / (2.0 * s);
                assert!((fd - c.trace_product(&e)).abs() <= 1e-4 * (1.0 + fd.abs()), "{fun:?}");
                assert!(f0 > 0.0);
                assert!(c.eigenvalues().unwrap()[0] > 0.0, "not elliptic");
            }
        }
    }

    #[test]
    fn real_coefficients_reproduce_the_trace_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for model in [Model::Complex { n: 2 }, Model::Complex { n: 3 }, Model::Real { d: 3 }] {
            let dims = model.axes();
            let m = model.form_dim();
            let g = HermitianMatrix::from_upper(m, |i, j| {
                let im = if matches!(model, Model::Real { .. }) || i == j { 0.0 } else { rng.random_range(-1.0..1.0) };
                Complex::new(rng.random_range(-1.0..1.0), im)
            });
            let mut s = [[0.0; MAX_AXES]; MAX_AXES];
            for a in 0..dims {
                for b in a..dims {
                    s[a][b] = rng.random_range(-1.0..1.0);
                    s[b][a] = s[a][b];
                }
            }
            let mut coeffs = vec![0.0; coefficient_count(dims)];
            real_coefficients(model, &g, &mut coeffs);
            let mut k = 0;
            let mut pairing = 0.0;
            for a in 0..dims {
                for b in a..dims {
                    pairing += if a == b { 1.0 } else { 2.0 } * coeffs[k] * s[a][b];
                    k += 1;
                }
            }
            let expected = g.trace_product(&form_of_hessian(model, &s));
            assert_relative_eq!(pairing, expected, epsilon = 1e-12);
        }
    }
}
