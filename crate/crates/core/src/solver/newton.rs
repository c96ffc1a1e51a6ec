//! Residual evaluation, damped Newton steps and the continuity path
//! `psi_t = (1 - t) f(lambda(g[u_sub])) + t psi`.

use std::sync::Arc;

use rayon::prelude::*;

use super::form::{coefficient_count, node_form, real_coefficients, spectral_derivative, HermitianFormField};
use super::grid::{GridGeometry, ScalarField};
use super::operator::EllipticOperator;
use super::report::{comparison_check, estimate_report, harmonic_majorant, SolveReport};
use super::SolverError;
use crate::cone::SymmetricFunction;
use crate::linalg::{bicgstab, HermitianMatrix};

const NODE_CHUNK: usize = 1024;

/// Smallest damping factor tried is `2^-MAX_HALVINGS`.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Sup-norm residual accepted at `t = 1`.
    pub tolerance: f64,
    /// Sup-norm residual accepted at intermediate `t`.
    pub path_tolerance: f64,
    /// Relative residual of each linear solve.
    pub linear_tolerance: f64,
    pub max_linear_iterations: usize,
    /// Newton iterations allowed per continuity step before it is retried
    /// with half the step.
    pub max_newton: usize,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            path_tolerance: 1e-6,
            linear_tolerance: 1e-10,
            max_linear_iterations: 2000,
            max_newton: 25,
            dt_initial: 0.1,
            dt_min: 1e-4,
            dt_max: 0.1,
        }
    }
}

/// Data of one Dirichlet problem `f(lambda(g[u])) = psi`, `u = phi` on the faces.
#[derive(Debug, Clone)]
pub struct Problem {
    pub fun: SymmetricFunction,
    pub chi: HermitianFormField,
    pub psi: ScalarField,
    pub phi: ScalarField,
    pub subsolution: ScalarField,
}

impl Problem {
    pub fn geometry(&self) -> &Arc<GridGeometry> {
        self.psi.geometry()
    }

    fn validate(&self) -> Result<(), SolverError> {
        let g = self.geometry();
        for other in [self.chi.geometry(), self.phi.geometry(), self.subsolution.geometry()] {
            if other != g {
                return Err(SolverError::Geometry("problem fields live on different geometries".into()));
            }
        }
        if self.fun.dim() != g.form_dim() {
            return Err(SolverError::Geometry(format!(
                "function acts on {} eigenvalues, forms are {}x{}",
                self.fun.dim(),
                g.form_dim(),
                g.form_dim()
            )));
        }
        Ok(())
    }
}

/// `f(lambda(g[u]))` at interior nodes (zero on the faces) and optionally
/// the operator coefficients of the linearization.
pub(crate) struct Evaluation {
    pub f: Vec<f64>,
    pub coeffs: Option<Vec<f64>>,
}

pub(crate) fn evaluate(
    fun: &SymmetricFunction,
    chi: &HermitianFormField,
    u: &ScalarField,
    with_coeffs: bool,
) -> Result<Evaluation, SolverError> {
    let geom = u.geometry();
    let len = geom.len();
    let k = coefficient_count(geom.axes());
    let mut f = vec![0.0; len];
    let mut coeffs = if with_coeffs { vec![0.0; len * k] } else { Vec::new() };
    let model = geom.model();

    let node = |idx: usize, f: &mut f64, c: Option<&mut [f64]>| -> Result<(), String> {
        let g = node_form(chi, u, idx);
        match c {
            Some(slot) => {
                let (v, coeff) = spectral_derivative(fun, &g)?;
                *f = v;
                real_coefficients(model, &coeff, slot);
            }
            None => {
                let lambda = g.eigenvalues().map_err(|e| e.to_string())?;
                *f = fun
                    .eval(&crate::cone::Lambda::new(lambda.clone()))
                    .map_err(|_| format!("eigenvalues {lambda:?} are outside the cone"))?;
            }
        }
        Ok(())
    };

    let failures: Vec<Option<(usize, String)>> = if with_coeffs {
        f.par_chunks_mut(NODE_CHUNK)
            .zip(coeffs.par_chunks_mut(NODE_CHUNK * k))
            .enumerate()
            .map(|(c, (fs, cs))| {
                for (o, fv) in fs.iter_mut().enumerate() {
                    let idx = c * NODE_CHUNK + o;
                    if !geom.is_boundary(idx) {
                        if let Err(e) = node(idx, fv, Some(&mut cs[o * k..(o + 1) * k])) {
                            return Some((idx, e));
                        }
                    }
                }
                None
            })
            .collect()
    } else {
        f.par_chunks_mut(NODE_CHUNK)
            .enumerate()
            .map(|(c, fs)| {
                for (o, fv) in fs.iter_mut().enumerate() {
                    let idx = c * NODE_CHUNK + o;
                    if !geom.is_boundary(idx) {
                        if let Err(e) = node(idx, fv, None) {
                            return Some((idx, e));
                        }
                    }
                }
                None
            })
            .collect()
    };
    if let Some((idx, reason)) = failures.into_iter().flatten().next() {
        return Err(SolverError::NotAdmissible {
            node: super::form::node_label(geom, idx),
            reason,
        });
    }
    Ok(Evaluation {
        f,
        coeffs: with_coeffs.then_some(coeffs),
    })
}

/// `f(lambda(g[u])) - psi_t` at interior nodes, zero on the faces.
pub fn residual(
    fun: &SymmetricFunction,
    chi: &HermitianFormField,
    u: &ScalarField,
    psi_t: &ScalarField,
) -> Result<ScalarField, SolverError> {
    let ev = evaluate(fun, chi, u, false)?;
    Ok(interior_difference(u.geometry(), ev.f, psi_t))
}

fn interior_difference(geom: &Arc<GridGeometry>, mut f: Vec<f64>, psi: &ScalarField) -> ScalarField {
    for (i, v) in f.iter_mut().enumerate() {
        *v = if geom.is_boundary(i) { 0.0 } else { *v - psi.values()[i] };
    }
    ScalarField::from_values(geom, f).expect("same geometry")
}

/// Coefficient matrices `F^{i j-bar}` at interior nodes (`None` on the faces).
pub fn linearize(
    fun: &SymmetricFunction,
    chi: &HermitianFormField,
    u: &ScalarField,
) -> Result<Vec<Option<HermitianMatrix<f64>>>, SolverError> {
    let geom = u.geometry();
    (0..geom.len())
        .map(|idx| {
            if geom.is_boundary(idx) {
                return Ok(None);
            }
            spectral_derivative(fun, &node_form(chi, u, idx))
                .map(|(_, c)| Some(c))
                .map_err(|reason| SolverError::NotAdmissible {
                    node: super::form::node_label(geom, idx),
                    reason,
                })
        })
        .collect()
}

/// One Newton iteration as recorded in the history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRecord {
    pub residual_before: f64,
    pub residual_after: f64,
    pub damping: f64,
    pub linear_iterations: usize,
}

/// Iterate and bookkeeping along the continuity path.
#[derive(Debug, Clone)]
pub struct ContinuityState {
    pub t: f64,
    pub u: ScalarField,
    pub psi_t: ScalarField,
    pub history: Vec<NewtonRecord>,
}

impl ContinuityState {
    pub fn residual_norm(&self) -> Option<f64> {
        self.history.last().map(|r| r.residual_after)
    }
}

/// Solves `L du = -residual` with `du = 0` on the faces and applies the
/// largest damping factor `2^-k`, `k <= 10`, that keeps every node
/// admissible and lowers the sup-norm residual.
pub fn newton_step(
    state: &mut ContinuityState,
    fun: &SymmetricFunction,
    chi: &HermitianFormField,
    config: &SolveConfig,
) -> Result<NewtonRecord, SolverError> {
    let geom = Arc::clone(state.u.geometry());
    let ev = evaluate(fun, chi, &state.u, true)?;
    let r = interior_difference(&geom, ev.f, &state.psi_t);
    let before = r.sup_norm();
    if before == 0.0 {
        let rec = NewtonRecord {
            residual_before: 0.0,
            residual_after: 0.0,
            damping: 0.0,
            linear_iterations: 0,
        };
        state.history.push(rec);
        return Ok(rec);
    }
    let op = EllipticOperator::new(&geom, ev.coeffs.expect("requested"));
    let b: Vec<f64> = r.values().iter().map(|v| -v).collect();
    let mut du = vec![0.0; geom.len()];
    let stats = bicgstab(&op, &b, &mut du, config.linear_tolerance, config.max_linear_iterations)?;
    let du = ScalarField::from_values(&geom, du)?;

    let mut theta = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let trial = state.u.axpy(theta, &du);
        if let Ok(res) = residual(fun, chi, &trial, &state.psi_t) {
            let after = res.sup_norm();
            if after < before {
                state.u = trial;
                let rec = NewtonRecord {
                    residual_before: before,
                    residual_after: after,
                    damping: theta,
                    linear_iterations: stats.iterations,
                };
                state.history.push(rec);
                return Ok(rec);
            }
        }
        theta *= 0.5;
    }
    Err(SolverError::NoDamping { t: state.t, residual: before })
}

/// Statistics of a continuity run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathStats {
    pub final_t: f64,
    pub final_residual: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    /// Sup-norm residuals of the final continuity step: the value before the
    /// first Newton iteration followed by the value after each iteration.
    pub last_step_residuals: Vec<f64>,
}

/// Runs Newton at fixed `psi_t` until the residual drops below `tol`.
fn converge(
    state: &mut ContinuityState,
    fun: &SymmetricFunction,
    chi: &HermitianFormField,
    config: &SolveConfig,
    tol: f64,
    stats: &mut PathStats,
) -> Result<Vec<f64>, SolverError> {
    let r0 = residual(fun, chi, &state.u, &state.psi_t)?.sup_norm();
    let mut trace = vec![r0];
    let mut current = r0;
    let mut iterations = 0;
    while current > tol {
        if iterations == config.max_newton {
            return Err(SolverError::Stall { t: state.t, residual: current });
        }
        let rec = newton_step(state, fun, chi, config)?;
        iterations += 1;
        stats.newton_iterations += 1;
        stats.linear_iterations += rec.linear_iterations;
        current = rec.residual_after;
        trace.push(current);
    }
    Ok(trace)
}

fn blend(a: &ScalarField, b: &ScalarField, t: f64) -> ScalarField {
    let values = a.values().iter().zip(b.values()).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    ScalarField::from_values(a.geometry(), values).expect("same geometry")
}

/// Follows `t: 0 -> 1` from `u = u_sub`, returning the final state.
///
/// The step starts at `dt_initial`, halves whenever Newton fails to reach
/// the path tolerance, and doubles again (up to `dt_max`) after each accepted
/// step. A step below `dt_min` ends the run with [`SolverError::Stall`].
pub fn continuity_path(problem: &Problem, config: &SolveConfig) -> Result<(ContinuityState, PathStats), SolverError> {
    problem.validate()?;
    let geom = Arc::clone(problem.geometry());
    let sub = &problem.subsolution;
    if sub.boundary_difference(&problem.phi) > 1e-12 {
        return Err(SolverError::BoundaryMismatch {
            max_difference: sub.boundary_difference(&problem.phi),
        });
    }
    let f_sub = evaluate(&problem.fun, &problem.chi, sub, false)?.f;
    for idx in geom.interior_nodes() {
        let psi = problem.psi.values()[idx];
        if f_sub[idx] < psi - 1e-12 * (1.0 + psi.abs()) {
            return Err(SolverError::NotSubsolution {
                node: super::form::node_label(&geom, idx),
                margin: f_sub[idx] - psi,
            });
        }
    }
    let start = ScalarField::from_values(&geom, f_sub)?;

    let mut state = ContinuityState {
        t: 0.0,
        u: sub.clone(),
        psi_t: start.clone(),
        history: Vec::new(),
    };
    let mut stats = PathStats::default();
    let mut dt = config.dt_initial.min(1.0);
    while state.t < 1.0 {
        let mut t_next = (state.t + dt).min(1.0);
        if 1.0 - t_next < 1e-9 {
            t_next = 1.0;
        }
        let tol = if t_next >= 1.0 { config.tolerance } else { config.path_tolerance.max(config.tolerance) };
        let mut trial = ContinuityState {
            t: t_next,
            u: state.u.clone(),
            psi_t: blend(&start, &problem.psi, t_next),
            history: Vec::new(),
        };
        match converge(&mut trial, &problem.fun, &problem.chi, config, tol, &mut stats) {
            Ok(trace) => {
                stats.accepted_steps += 1;
                stats.final_residual = *trace.last().expect("nonempty");
                stats.last_step_residuals = trace;
                state.history.extend(trial.history.iter().copied());
                state.t = t_next;
                state.u = trial.u;
                state.psi_t = trial.psi_t;
                dt = (2.0 * dt).min(config.dt_max);
            }
            Err(err) => {
                stats.rejected_steps += 1;
                dt *= 0.5;
                if dt < config.dt_min {
                    let residual = match err {
                        SolverError::Stall { residual, .. } | SolverError::NoDamping { residual, .. } => residual,
                        _ => f64::NAN,
                    };
                    stats.final_t = state.t;
                    return Err(SolverError::PathStall {
                        t: state.t,
                        residual,
                        cause: err.to_string(),
                    });
                }
            }
        }
    }
    stats.final_t = state.t;
    Ok((state, stats))
}

/// Continuity solve plus comparison check against the harmonic majorant and
/// the estimate report.
pub fn continuity_solve(problem: &Problem, config: &SolveConfig) -> Result<(ScalarField, SolveReport), SolverError> {
    let (state, stats) = continuity_path(problem, config)?;
    let w = harmonic_majorant(&problem.chi, &problem.phi, config)?;
    let mut report = estimate_report(&state.u);
    report.comparison_violations = comparison_check(&state.u, &problem.subsolution, &w);
    report.set_path_stats(&stats);
    Ok((state.u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{parse_chi, Expr};

    fn problem(geom: &Arc<GridGeometry>, fun: SymmetricFunction, psi: &str, phi: &str, sub: &str) -> Problem {
        let chi = HermitianFormField::constant(geom, &parse_chi("identity", geom.form_dim()).unwrap()).unwrap();
        Problem {
            fun,
            chi,
            psi: Expr::parse(psi, geom).unwrap().sample(geom),
            phi: Expr::parse(phi, geom).unwrap().sample(geom),
            subsolution: Expr::parse(sub, geom).unwrap().sample(geom),
        }
    }

    #[test]
    fn trivial_problem_stays_at_zero() {
        let geom = GridGeometry::complex(2, 6).unwrap();
        let p = problem(&geom, SymmetricFunction::monge_ampere(2), "const:1", "zero", "zero");
        let r = residual(&p.fun, &p.chi, &p.subsolution, &p.psi).unwrap();
        assert_eq!(r.sup_norm(), 0.0);
        let (u, report) = continuity_solve(&p, &SolveConfig::default()).unwrap();
        assert!(u.sup_norm() <= 1e-12);
        assert_eq!(report.comparison_violations, 0);
        assert!(report.final_residual <= 1e-8);
    }

    #[test]
    fn zero_residual_leaves_state_unchanged() {
        let geom = GridGeometry::complex(2, 4).unwrap();
        let p = problem(&geom, SymmetricFunction::monge_ampere(2), "const:1", "zero", "zero");
        let mut state = ContinuityState {
            t: 1.0,
            u: p.subsolution.clone(),
            psi_t: p.psi.clone(),
            history: vec![],
        };
        let rec = newton_step(&mut state, &p.fun, &p.chi, &SolveConfig::default()).unwrap();
        assert_eq!(rec.residual_before, 0.0);
        assert_eq!(state.u, p.subsolution);
    }

    #[test]
    fn sigma1_is_solved_by_one_newton_step() {
        let geom = GridGeometry::complex(2, 6).unwrap();
        let p = problem(&geom, SymmetricFunction::sigma1(2), "const:2.5", "zero", "bowl:3");
        let mut state = ContinuityState {
            t: 1.0,
            u: p.subsolution.clone(),
            psi_t: p.psi.clone(),
            history: vec![],
        };
        let rec = newton_step(&mut state, &p.fun, &p.chi, &SolveConfig::default()).unwrap();
        assert_eq!(rec.damping, 1.0);
        assert!(rec.residual_after <= 1e-9 * rec.residual_before, "{rec:?}");
    }

    #[test]
    fn constant_path_when_psi_is_induced_by_the_subsolution() {
        let geom = GridGeometry::complex(2, 6).unwrap();
        let mut p = problem(&geom, SymmetricFunction::monge_ampere(2), "const:1", "zero", "bowl:1+0.01*trig:1");
        let f = evaluate(&p.fun, &p.chi, &p.subsolution, false).unwrap().f;
        p.psi = ScalarField::from_values(&geom, f).unwrap();
        p.phi = p.subsolution.clone();
        let (u, report) = continuity_solve(&p, &SolveConfig::default()).unwrap();
        assert!(u.max_difference(&p.subsolution) <= 1e-12);
        assert_eq!(report.newton_iterations, 0);
    }

    #[test]
    fn rejects_a_non_subsolution() {
        let geom = GridGeometry::complex(2, 4).unwrap();
        let p = problem(&geom, SymmetricFunction::monge_ampere(2), "const:2", "zero", "zero");
        assert!(matches!(
            continuity_solve(&p, &SolveConfig::default()),
            Err(SolverError::NotSubsolution { .. })
        ));
        let p = problem(&geom, SymmetricFunction::monge_ampere(2), "const:1", "const:1", "zero");
        assert!(matches!(
            continuity_solve(&p, &SolveConfig::default()),
            Err(SolverError::BoundaryMismatch { .. })
        ));
    }
}
