//! Approximation of a degenerate equation (`min psi = sup f` on the cone
//! boundary) by the shifted problems `psi + eps`.

use super::grid::ScalarField;
use super::newton::{continuity_solve, evaluate, Problem, SolveConfig};
use super::stencil;
use super::form::form_of_hessian;
use super::SolverError;

/// One `eps` of the sweep; failures are recorded rather than propagated.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateRow {
    pub eps: f64,
    pub converged: bool,
    pub sup_grad: f64,
    /// `sup |tr(form(D^2 u))|` over all nodes.
    pub sup_laplacian: f64,
    pub final_residual: f64,
    pub newton_iterations: usize,
    pub error: Option<String>,
}

pub const DEGENERATE_CSV_HEADER: &str = "eps,converged,sup_grad,sup_laplacian,final_residual,newton_iterations,error";

impl DegenerateRow {
    pub fn csv_row(&self) -> String {
        let err = self.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        format!(
            "{},{},{:.12e},{:.12e},{:.6e},{},{}",
            self.eps, self.converged, self.sup_grad, self.sup_laplacian, self.final_residual, self.newton_iterations, err
        )
    }
}

/// `min_i (f(lambda(g[u_sub])) - psi)` over interior nodes.
pub fn strictness(problem: &Problem) -> Result<f64, SolverError> {
    let geom = problem.geometry();
    let f = evaluate(&problem.fun, &problem.chi, &problem.subsolution, false)?.f;
    Ok(geom
        .interior_nodes()
        .map(|i| f[i] - problem.psi.values()[i])
        .fold(f64::INFINITY, f64::min))
}

/// `sup |tr(form(D^2 u))|`: the model Laplacian, one-sided on the faces.
pub fn sup_form_laplacian(u: &ScalarField) -> f64 {
    let geom = u.geometry();
    (0..geom.len())
        .map(|i| form_of_hessian(geom.model(), &stencil::hessian(geom, u.values(), i)).trace().abs())
        .fold(0.0, f64::max)
}

/// Solves with `psi + eps` for every `eps` (positive, strictly decreasing).
/// Requires the subsolution to be strict: `f(lambda(g[u_sub])) >= psi + delta0`
/// with `delta0 > 0`, and every `eps` below `delta0`.
pub fn degenerate_sweep(
    problem: &Problem,
    eps_list: &[f64],
    config: &SolveConfig,
) -> Result<Vec<DegenerateRow>, SolverError> {
    if eps_list.iter().any(|e| !(*e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SolverError::Parse("eps list must be positive and strictly decreasing".into()));
    }
    let delta0 = strictness(problem)?;
    if !(delta0 > 0.0) {
        return Err(SolverError::NotSubsolution {
            node: "(strictness)".into(),
            margin: delta0,
        });
    }
    if let Some(&e) = eps_list.iter().find(|&&e| e >= delta0) {
        return Err(SolverError::Parse(format!("eps = {e} is not below the strictness {delta0}")));
    }
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let mut shifted = problem.clone();
            shifted.psi.values_mut().iter_mut().for_each(|v| *v += eps);
            match continuity_solve(&shifted, config) {
                Ok((u, report)) => DegenerateRow {
                    eps,
                    converged: true,
                    sup_grad: report.sup_grad(),
                    sup_laplacian: sup_form_laplacian(&u),
                    final_residual: report.final_residual,
                    newton_iterations: report.newton_iterations,
                    error: None,
                },
                Err(err) => DegenerateRow {
                    eps,
                    converged: false,
                    sup_grad: f64::NAN,
                    sup_laplacian: f64::NAN,
                    final_residual: f64::NAN,
                    newton_iterations: 0,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect())
}
