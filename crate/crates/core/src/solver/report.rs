//! Norm diagnostics of solved fields, the harmonic majorant and the
//! comparison check.

use std::sync::Arc;

use super::form::{coefficient_count, form_of_hessian, real_coefficients, HermitianFormField};
use super::grid::{GridGeometry, Model, ScalarField};
use super::newton::{PathStats, SolveConfig};
use super::operator::EllipticOperator;
use super::stencil;
use super::SolverError;
use crate::linalg::{bicgstab, HermitianMatrix};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub sup_u: f64,
    /// Centered gradient norm over interior nodes.
    pub grad_interior: f64,
    /// Gradient norm on the faces (one-sided normal derivative).
    pub grad_boundary: f64,
    /// Spectral norm of the Hessian form over interior nodes.
    pub hess_interior: f64,
    /// Spectral norm of the Hessian form on the faces.
    pub hess_boundary: f64,
    /// `hess_boundary / (1 + max(grad_interior, grad_boundary)^2)`.
    pub boundary_ratio: f64,
    /// Largest tangential-normal entry on the faces over `1 + sup |grad u|`.
    pub tangential_normal_ratio: f64,
    pub comparison_violations: usize,
    pub final_t: f64,
    pub final_residual: f64,
    pub continuity_steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub last_step_residuals: Vec<f64>,
    /// Real model only: smallest tangential eigenvalue of `g - g_sub` on the faces.
    pub tangential_gap: Option<f64>,
}

pub const REPORT_CSV_HEADER: &str = "sup_u,grad_interior,grad_boundary,hess_interior,hess_boundary,boundary_ratio,tangential_normal_ratio,comparison_violations,final_t,final_residual,continuity_steps,rejected_steps,newton_iterations,linear_iterations,tangential_gap";

impl SolveReport {
    pub fn sup_grad(&self) -> f64 {
        self.grad_interior.max(self.grad_boundary)
    }

    pub(crate) fn set_path_stats(&mut self, stats: &PathStats) {
        self.final_t = stats.final_t;
        self.final_residual = stats.final_residual;
        self.continuity_steps = stats.accepted_steps;
        self.rejected_steps = stats.rejected_steps;
        self.newton_iterations = stats.newton_iterations;
        self.linear_iterations = stats.linear_iterations;
        self.last_step_residuals = stats.last_step_residuals.clone();
    }

    /// Residual reduction factors `r_{k-1} / r_k` of the final continuity step.
    pub fn last_step_reductions(&self) -> Vec<f64> {
        self.last_step_residuals
            .windows(2)
            .map(|w| if w[1] == 0.0 { f64::INFINITY } else { w[0] / w[1] })
            .collect()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{:.6e},{},{},{},{},{}",
            self.sup_u,
            self.grad_interior,
            self.grad_boundary,
            self.hess_interior,
            self.hess_boundary,
            self.boundary_ratio,
            self.tangential_normal_ratio,
            self.comparison_violations,
            self.final_t,
            self.final_residual,
            self.continuity_steps,
            self.rejected_steps,
            self.newton_iterations,
            self.linear_iterations,
            self.tangential_gap.map(|g| format!("{g:.6e}")).unwrap_or_default()
        )
    }
}

fn spectral_norm(m: &HermitianMatrix<f64>) -> f64 {
    match m.eigenvalues() {
        Ok(v) => v.iter().fold(0.0f64, |a, x| a.max(x.abs())),
        Err(_) => f64::NAN,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Norms of `u`, its gradient and its Hessian form, split into interior and
/// boundary parts.
pub fn estimate_report(u: &ScalarField) -> SolveReport {
    let geom = u.geometry();
    let dims = geom.axes();
    let model = geom.model();
    let dir = geom.dirichlet_axis();
    let mut r = SolveReport {
        sup_u: u.sup_norm(),
        ..SolveReport::default()
    };
    let mut tangential_normal: f64 = 0.0;
    for idx in 0..geom.len() {
        let g = norm(&stencil::gradient(geom, u.values(), idx)[..dims]);
        let s = stencil::hessian(geom, u.values(), idx);
        let form = form_of_hessian(model, &s);
        let h = spectral_norm(&form);
        if geom.is_boundary(idx) {
            r.grad_boundary = r.grad_boundary.max(g);
            r.hess_boundary = r.hess_boundary.max(h);
            let tn = match model {
                Model::Complex { n } => (0..n - 1).map(|a| form.get(a, n - 1).norm()).fold(0.0, f64::max),
                Model::Real { .. } => (0..dims).filter(|&a| a != dir).map(|a| s[a][dir].abs()).fold(0.0, f64::max),
            };
            tangential_normal = tangential_normal.max(tn);
        } else {
            r.grad_interior = r.grad_interior.max(g);
            r.hess_interior = r.hess_interior.max(h);
        }
    }
    let sup_grad = r.sup_grad();
    r.boundary_ratio = r.hess_boundary / (1.0 + sup_grad * sup_grad);
    r.tangential_normal_ratio = tangential_normal / (1.0 + sup_grad);
    r
}

/// The model's Laplacian `tr(D^2 w)` in form coordinates: `(1/4)` of the
/// real Laplacian for the complex model, the real Laplacian otherwise.
fn laplacian_operator(geom: &Arc<GridGeometry>) -> EllipticOperator {
    let dims = geom.axes();
    let mut node = vec![0.0; coefficient_count(dims)];
    real_coefficients(geom.model(), &HermitianMatrix::identity(geom.form_dim()), &mut node);
    let coeffs = node.iter().copied().cycle().take(node.len() * geom.len()).collect();
    EllipticOperator::new(geom, coeffs)
}

/// Solves `Delta w + tr chi = 0` inside and `w = phi` on the faces, with
/// `Delta` the model Laplacian (trace of the Hessian form).
pub fn harmonic_majorant(
    chi: &HermitianFormField,
    phi: &ScalarField,
    config: &SolveConfig,
) -> Result<ScalarField, SolverError> {
    let geom = phi.geometry();
    if chi.geometry() != geom {
        return Err(SolverError::Geometry("chi and phi live on different geometries".into()));
    }
    let op = laplacian_operator(geom);
    let trace = chi.trace();
    let mut w0 = ScalarField::zeros(geom);
    w0.set_boundary_from(phi);
    let mut lw = vec![0.0; geom.len()];
    op.apply_interior(w0.values(), &mut lw);
    let b: Vec<f64> = (0..geom.len())
        .map(|i| if geom.is_boundary(i) { 0.0 } else { -(lw[i] + trace.values()[i]) })
        .collect();
    let mut v = vec![0.0; geom.len()];
    bicgstab(&op, &b, &mut v, config.linear_tolerance.min(1e-12), config.max_linear_iterations)?;
    Ok(w0.axpy(1.0, &ScalarField::from_values(geom, v)?))
}

/// Tolerance of the comparison check on a grid with spacing `h`.
pub fn comparison_tolerance(h: f64) -> f64 {
    10.0 * h * h + 1e-8
}

/// Nodes violating `u_sub - tol <= u <= w + tol`.
pub fn comparison_check(u: &ScalarField, sub: &ScalarField, w: &ScalarField) -> usize {
    let tol = comparison_tolerance(u.geometry().h());
    u.values()
        .iter()
        .zip(sub.values())
        .zip(w.values())
        .filter(|((&ui, &si), &wi)| ui < si - tol || ui > wi + tol)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{parse_chi, Expr};

    #[test]
    fn zero_field_has_zero_norms() {
        let geom = GridGeometry::complex(2, 5).unwrap();
        let r = estimate_report(&ScalarField::zeros(&geom));
        assert_eq!(r, SolveReport::default());
    }

    #[test]
    fn linear_in_the_normal_coordinate() {
        let geom = GridGeometry::complex(2, 6).unwrap();
        let u = Expr::parse("lin:x2:0.7", &geom).unwrap().sample(&geom);
        let r = estimate_report(&u);
        assert!((r.grad_interior - 0.7).abs() < 1e-12);
        assert!((r.grad_boundary - 0.7).abs() < 1e-12);
        assert!(r.hess_boundary < 1e-10 && r.hess_interior < 1e-10);
        assert!(r.boundary_ratio < 1e-10);
    }

    #[test]
    fn majorant_matches_one_dimensional_oracle() {
        // (1/4) w'' = -2 with zero ends: w = 4 x (1 - x)
        let geom = GridGeometry::complex(2, 8).unwrap();
        let chi = HermitianFormField::constant(&geom, &parse_chi("identity", 2).unwrap()).unwrap();
        let w = harmonic_majorant(&chi, &ScalarField::zeros(&geom), &SolveConfig::default()).unwrap();
        let oracle = ScalarField::from_fn(&geom, |p| 4.0 * p[2] * (1.0 - p[2]));
        assert!(w.max_difference(&oracle) < 1e-10);
    }

    #[test]
    fn majorant_superposition_and_traceless_chi() {
        let geom = GridGeometry::complex(2, 6).unwrap();
        let cfg = SolveConfig::default();
        let zero_chi = HermitianFormField::constant(&geom, &HermitianMatrix::zeros(2)).unwrap();
        let traceless = HermitianFormField::constant(&geom, &parse_chi("diag:1:-1", 2).unwrap()).unwrap();
        assert!(harmonic_majorant(&traceless, &ScalarField::zeros(&geom), &cfg).unwrap().sup_norm() < 1e-12);
        let chi = HermitianFormField::constant(&geom, &parse_chi("scaled:1.5", 2).unwrap()).unwrap();
        let phi1 = Expr::parse("cos:y2:0.3+lin:x2:1", &geom).unwrap().sample(&geom);
        let phi2 = Expr::parse("cos:x1:0.2", &geom).unwrap().sample(&geom);
        let w12 = harmonic_majorant(&chi, &phi1.axpy(1.0, &phi2), &cfg).unwrap();
        let w1 = harmonic_majorant(&chi, &phi1, &cfg).unwrap();
        let w2 = harmonic_majorant(&zero_chi, &phi2, &cfg).unwrap();
        assert!(w12.max_difference(&w1.axpy(1.0, &w2)) < 1e-10);
    }

    #[test]
    fn comparison_counts() {
        let geom = GridGeometry::real(2, 4).unwrap();
        let z = ScalarField::zeros(&geom);
        assert_eq!(comparison_check(&z, &z, &z), 0);
        let mut u = z.clone();
        u.values_mut()[3] = 1.0;
        u.values_mut()[7] = -1.0;
        assert_eq!(comparison_check(&u, &z, &z), 2);
    }
}
