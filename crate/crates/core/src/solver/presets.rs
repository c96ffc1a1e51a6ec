//! Ready-made problems: trivial, manufactured and analytically induced data.

use std::sync::Arc;

use super::expr::Expr;
use super::form::{form_of_hessian, parse_chi, HermitianFormField};
use super::grid::{GridGeometry, ScalarField};
use super::newton::Problem;
use super::SolverError;
use crate::cone::{Lambda, SymmetricFunction};

/// `f(lambda(chi + form(D^2 e)))` from the analytic Hessian of `e`.
pub fn induced_psi(
    fun: &SymmetricFunction,
    chi: &HermitianFormField,
    e: &Expr,
) -> Result<ScalarField, SolverError> {
    let geom = chi.geometry();
    let dims = geom.axes();
    let mut values = vec![0.0; geom.len()];
    for (idx, v) in values.iter_mut().enumerate() {
        let p = geom.position(idx);
        let jet = e.jet(&p[..dims]);
        let g = chi.at(idx).add(&form_of_hessian(geom.model(), &jet.hess));
        let lambda = g.eigenvalues().map_err(|err| SolverError::Eigen {
            node: super::form::node_label(geom, idx),
            source: err,
        })?;
        *v = fun.eval(&Lambda::new(lambda)).map_err(|_| SolverError::NotAdmissible {
            node: super::form::node_label(geom, idx),
            reason: format!("{e} is not admissible"),
        })?;
    }
    ScalarField::from_values(geom, values)
}

/// `chi = I`, `psi = f(1,...,1)`, `phi = 0`, `u_sub = 0`: solved by `u = 0`.
pub fn trivial_problem(geom: &Arc<GridGeometry>, fun: SymmetricFunction) -> Result<Problem, SolverError> {
    let chi = HermitianFormField::constant(geom, &parse_chi("identity", geom.form_dim())?)?;
    let f1 = fun
        .eval(&Lambda::constant(geom.form_dim(), 1.0))
        .map_err(|e| SolverError::Parse(e.to_string()))?;
    Ok(Problem {
        fun,
        chi,
        psi: ScalarField::from_fn(geom, |_| f1),
        phi: ScalarField::zeros(geom),
        subsolution: ScalarField::zeros(geom),
    })
}

/// Manufactured problem with exact solution `u* = trig:amplitude`,
/// `chi = I`, `psi` induced by `u*`, and subsolution `u* + bowl:bowl`
/// (which equals `u*` on the faces).
pub fn manufactured_problem(
    geom: &Arc<GridGeometry>,
    fun: SymmetricFunction,
    amplitude: f64,
    bowl: f64,
) -> Result<(Problem, ScalarField), SolverError> {
    let chi = HermitianFormField::constant(geom, &parse_chi("identity", geom.form_dim())?)?;
    let exact = Expr::parse(&format!("trig:{amplitude}"), geom)?;
    let psi = induced_psi(&fun, &chi, &exact)?;
    let sub = exact.plus(&Expr::parse(&format!("bowl:{bowl}"), geom)?);
    let exact_field = exact.sample(geom);
    Ok((
        Problem {
            fun,
            chi,
            psi,
            phi: exact_field.clone(),
            subsolution: sub.sample(geom),
        },
        exact_field,
    ))
}

/// Member `s` of the boundary-scaling family: `phi = s phi0`, constant
/// `psi`, `chi = I` and subsolution `s phi0 + bowl:K` with the smallest
/// `K = K0 2^j` that makes it a discrete subsolution. Returns the problem
/// and `K`.
pub fn scaled_boundary_problem(
    geom: &Arc<GridGeometry>,
    fun: SymmetricFunction,
    phi0: &Expr,
    psi: f64,
    s: f64,
    k0: f64,
) -> Result<(Problem, f64), SolverError> {
    let chi = HermitianFormField::constant(geom, &parse_chi("identity", geom.form_dim())?)?;
    let phi = phi0.scaled(s);
    let psi_field = ScalarField::from_fn(geom, |_| psi);
    let mut k = k0;
    for _ in 0..40 {
        let sub = phi.plus(&Expr::parse(&format!("bowl:{k}"), geom)?);
        let problem = Problem {
            fun,
            chi: chi.clone(),
            psi: psi_field.clone(),
            phi: phi.sample(geom),
            subsolution: sub.sample(geom),
        };
        if super::degenerate::strictness(&problem).is_ok_and(|m| m >= 0.0) {
            return Ok((problem, k));
        }
        k *= 2.0;
    }
    Err(SolverError::NotSubsolution {
        node: "(scaling family)".into(),
        margin: f64::NAN,
    })
}
