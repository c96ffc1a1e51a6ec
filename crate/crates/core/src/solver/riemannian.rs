//! Real-Hessian variant `f(lambda(chi + D^2 u)) = psi` on the flat cylinder
//! `T^{d-1} x [0, 1]`. Its boundary is totally geodesic, so the boundary
//! condition on `g - g_sub` reduces to the tangential block vanishing.

use super::form::node_form;
use super::grid::{Model, ScalarField};
use super::newton::{continuity_solve, Problem, SolveConfig};
use super::report::SolveReport;
use super::SolverError;
use crate::linalg::HermitianMatrix;

/// Smallest eigenvalue of the tangential block of `g[u] - g[u_sub]` over all
/// boundary nodes.
pub fn tangential_gap(problem: &Problem, u: &ScalarField) -> Result<f64, SolverError> {
    let geom = u.geometry();
    let d = geom.axes();
    let dir = geom.dirichlet_axis();
    let tangential: Vec<usize> = (0..d).filter(|&a| a != dir).collect();
    let mut gap = f64::INFINITY;
    for idx in geom.boundary_nodes() {
        let diff = node_form(&problem.chi, u, idx).add(&node_form(&problem.chi, &problem.subsolution, idx).scale(-1.0));
        if tangential.is_empty() {
            continue;
        }
        let block = HermitianMatrix::from_upper(tangential.len(), |i, j| diff.get(tangential[i], tangential[j]));
        let low = block.eigenvalues().map_err(|e| SolverError::Eigen {
            node: super::form::node_label(geom, idx),
            source: e,
        })?[0];
        gap = gap.min(low);
    }
    Ok(if gap.is_finite() { gap } else { 0.0 })
}

/// Continuity solve on the real model; fails if the tangential block of
/// `g - g_sub` drops below `-10 h^2` anywhere on the boundary.
pub fn solve_riemannian(problem: &Problem, config: &SolveConfig) -> Result<(ScalarField, SolveReport), SolverError> {
    if !matches!(problem.geometry().model(), Model::Real { .. }) {
        return Err(SolverError::Geometry("the real-Hessian solve needs the real model".into()));
    }
    let (u, mut report) = continuity_solve(problem, config)?;
    let gap = tangential_gap(problem, &u)?;
    report.tangential_gap = Some(gap);
    let h = problem.geometry().h();
    if gap < -10.0 * h * h {
        return Err(SolverError::TangentialCheck { gap, tolerance: 10.0 * h * h });
    }
    Ok((u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::SymmetricFunction;
    use crate::solver::{manufactured_problem, GridGeometry, HermitianFormField, parse_chi, Expr};
    use crate::linalg::bicgstab;
    use crate::solver::EllipticOperator;

    #[test]
    fn sigma1_matches_a_direct_poisson_solve() {
        let geom = GridGeometry::real(2, 16).unwrap();
        let chi = HermitianFormField::constant(&geom, &parse_chi("identity", 2).unwrap()).unwrap();
        let p = Problem {
            fun: SymmetricFunction::sigma1(2),
            chi,
            psi: Expr::parse("const:3+cos:x1:0.5", &geom).unwrap().sample(&geom),
            phi: ScalarField::zeros(&geom),
            subsolution: Expr::parse("bowl:2", &geom).unwrap().sample(&geom),
        };
        let (u, report) = solve_riemannian(&p, &SolveConfig::default()).unwrap();
        // Laplacian u = psi - 2 with zero boundary values
        let op = EllipticOperator::scaled_laplacian(&geom, 1.0);
        let b: Vec<f64> = (0..geom.len())
            .map(|i| if geom.is_boundary(i) { 0.0 } else { p.psi.values()[i] - 2.0 })
            .collect();
        let mut v = vec![0.0; geom.len()];
        bicgstab(&op, &b, &mut v, 1e-13, 100).unwrap();
        assert!(u.max_difference(&ScalarField::from_values(&geom, v).unwrap()) < 1e-9);
        assert_eq!(report.comparison_violations, 0);
        assert!(report.tangential_gap.unwrap().abs() < 1e-9);
    }

    #[test]
    fn manufactured_recovery_is_second_order() {
        let fun = SymmetricFunction::monge_ampere(2);
        let mut errors = vec![];
        for res in [16, 32] {
            let geom = GridGeometry::real(2, res).unwrap();
            let (p, exact) = manufactured_problem(&geom, fun, 0.02, 1.0).unwrap();
            let (u, report) = solve_riemannian(&p, &SolveConfig::default()).unwrap();
            assert_eq!(report.comparison_violations, 0);
            errors.push(u.max_difference(&exact));
        }
        let order = (errors[0] / errors[1]).log2();
        assert!((1.7..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn rejects_the_complex_model() {
        let geom = GridGeometry::complex(2, 4).unwrap();
        let p = crate::solver::trivial_problem(&geom, SymmetricFunction::sigma1(2)).unwrap();
        assert!(solve_riemannian(&p, &SolveConfig::default()).is_err());
    }
}
