//! The local boundary barrier
//! `Psi = A1 sqrt(b1) (u_sub - u) - A2 sqrt(b1) rho^2 + A3 sqrt(b1) (N sigma^2 - t sigma)
//!        + (1/sqrt(b1)) sum_{tau<n} |(u - phi)_tau|^2 + D(u - phi)`
//! near a boundary point, evaluated on a solved field together with the
//! sign of its image under the linearized operator.

use super::form::node_label;
use super::grid::{Model, ScalarField};
use super::newton::{evaluate, Problem};
use super::operator::EllipticOperator;
use super::stencil;
use super::SolverError;

/// Barrier constants. They are inputs: nothing here derives them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub n: f64,
    pub t: f64,
    pub delta: f64,
}

impl BarrierSpec {
    pub fn validate(&self) -> Result<(), SolverError> {
        let all = [self.a1, self.a2, self.a3, self.n, self.t, self.delta];
        if all.iter().any(|v| !(*v > 0.0)) {
            return Err(SolverError::Barrier("constants must be positive".into()));
        }
        if self.delta > 0.5 {
            return Err(SolverError::Barrier(format!(
                "delta = {} exceeds half the thickness of the domain",
                self.delta
            )));
        }
        if self.n * self.delta - self.t > 0.0 {
            return Err(SolverError::Barrier(format!(
                "N delta - t = {} must be nonpositive",
                self.n * self.delta - self.t
            )));
        }
        Ok(())
    }
}

/// Tangential coordinate derivative `sign * d/d(axis)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direction {
    pub axis: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierOutcome {
    pub b1: f64,
    /// Barrier values at every node (also outside the neighbourhood).
    pub psi: ScalarField,
    /// Interior nodes with `rho < delta`.
    pub region_nodes: usize,
    /// `min L Psi` over interior nodes with `rho < delta`.
    pub min_l_psi: f64,
    /// `max Psi` over the outer shell of the neighbourhood and the boundary
    /// nodes with `rho <= delta`.
    pub max_on_boundary: f64,
}

/// Builds the barrier at `p0` and reports the two maximum-principle
/// diagnostics. `u` must be admissible so the operator can be linearized.
pub fn barrier_eval(
    problem: &Problem,
    u: &ScalarField,
    spec: &BarrierSpec,
    p0: usize,
    direction: Direction,
) -> Result<BarrierOutcome, SolverError> {
    spec.validate()?;
    let geom = u.geometry();
    let n = match geom.model() {
        Model::Complex { n } => n,
        Model::Real { .. } => return Err(SolverError::Barrier("the barrier is defined for the complex model".into())),
    };
    if p0 >= geom.len() || !geom.is_boundary(p0) {
        return Err(SolverError::Barrier("p0 must be a boundary node".into()));
    }
    let dims = geom.axes();
    if direction.axis >= dims || direction.axis == geom.dirichlet_axis() {
        return Err(SolverError::Barrier("D must differentiate along a tangential axis".into()));
    }

    let w = u.axpy(-1.0, &problem.phi);
    let grad_w: Vec<_> = (0..geom.len()).map(|i| stencil::gradient(geom, w.values(), i)).collect();
    let sup_sq = |f: &ScalarField| {
        (0..geom.len())
            .map(|i| stencil::gradient(geom, f.values(), i)[..dims].iter().map(|x| x * x).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let sup_grad_w = grad_w
        .iter()
        .map(|g| g[..dims].iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max);
    let b1 = 1.0 + sup_grad_w + sup_sq(&problem.phi);
    let rb = b1.sqrt();
    let sign = if direction.positive { 1.0 } else { -1.0 };

    let values: Vec<f64> = (0..geom.len())
        .map(|i| {
            let rho = geom.distance(i, p0);
            let sigma = geom.boundary_distance(i);
            let g = &grad_w[i];
            // |w_{z_tau}|^2 = (w_x^2 + w_y^2) / 4
            let tangential: f64 = (0..n - 1).map(|tau| 0.25 * (g[2 * tau].powi(2) + g[2 * tau + 1].powi(2))).sum();
            spec.a1 * rb * (problem.subsolution.values()[i] - u.values()[i]) - spec.a2 * rb * rho * rho
                + spec.a3 * rb * (spec.n * sigma * sigma - spec.t * sigma)
                + tangential / rb
                + sign * g[direction.axis]
        })
        .collect();
    let psi = ScalarField::from_values(geom, values)?;

    let coeffs = evaluate(&problem.fun, &problem.chi, u, true)?.coeffs.expect("requested");
    let op = EllipticOperator::new(geom, coeffs);
    let inside = |i: usize| geom.distance(i, p0) < spec.delta;
    let mut region_nodes = 0;
    let mut min_l_psi = f64::INFINITY;
    let mut max_on_boundary = f64::NEG_INFINITY;
    for i in 0..geom.len() {
        if geom.is_boundary(i) {
            if geom.distance(i, p0) <= spec.delta {
                max_on_boundary = max_on_boundary.max(psi.values()[i]);
            }
            continue;
        }
        if inside(i) {
            region_nodes += 1;
            min_l_psi = min_l_psi.min(op.apply_at(psi.values(), i));
        } else {
            let nb = geom.neighbours(i);
            let touches = (0..dims).any(|a| {
                [nb.plus[a], nb.minus[a]]
                    .iter()
                    .any(|&d| inside((i as isize + d) as usize))
            });
            if touches {
                max_on_boundary = max_on_boundary.max(psi.values()[i]);
            }
        }
    }
    if region_nodes == 0 {
        return Err(SolverError::Barrier(format!(
            "no interior node within delta of {}",
            node_label(geom, p0)
        )));
    }
    Ok(BarrierOutcome {
        b1,
        psi,
        region_nodes,
        min_l_psi,
        max_on_boundary,
    })
}
