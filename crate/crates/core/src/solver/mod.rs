//! Continuity-method finite-difference solver for
//! `f(lambda(chi + i dd-bar u)) = psi` on the flat model
//! `T^{n-1} x (S^1 x [0, 1])`, with Dirichlet data on `Re z_n in {0, 1}`,
//! and its real-Hessian sibling on the flat cylinder `T^{d-1} x [0, 1]`.

mod barrier;
mod degenerate;
mod expr;
mod form;
mod grid;
mod io;
mod newton;
mod operator;
mod presets;
mod report;
mod riemannian;
mod stencil;

use thiserror::Error;

use crate::linalg::{EigenError, KrylovError};

pub use barrier::{barrier_eval, BarrierOutcome, BarrierSpec, Direction};
pub use degenerate::{degenerate_sweep, strictness, sup_form_laplacian, DegenerateRow, DEGENERATE_CSV_HEADER};
pub use expr::{Expr, Jet};
pub use form::{
    coefficient_count, complex_hessian, eigen_field, form_field, form_of_hessian, parse_chi, real_coefficients,
    spectral_derivative, HermitianFormField, CLUSTER_TOL,
};
pub use grid::{Face, GridGeometry, Model, Neighbours, ScalarField, MAX_AXES};
pub use io::{field_csv, read_raw, read_raw_on, write_raw, RAW_HEADER_LEN};
pub use newton::{
    continuity_path, continuity_solve, linearize, newton_step, residual, ContinuityState, NewtonRecord, PathStats,
    Problem, SolveConfig, MAX_HALVINGS,
};
pub use operator::EllipticOperator;
pub use presets::{induced_psi, manufactured_problem, scaled_boundary_problem, trivial_problem};
pub use report::{
    comparison_check, comparison_tolerance, estimate_report, harmonic_majorant, SolveReport, REPORT_CSV_HEADER,
};
pub use riemannian::{solve_riemannian, tangential_gap};
pub use stencil::{gradient, hessian, laplacian, AxisMatrix, AxisVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("node {node} is not admissible: {reason}")]
    NotAdmissible { node: String, reason: String },
    #[error("eigensolver failed at node {node}: {source}")]
    Eigen { node: String, source: EigenError },
    #[error("linear solve failed: {0}")]
    Krylov(#[from] KrylovError),
    #[error("subsolution violates f(lambda(g)) >= psi at node {node} by {margin:e}")]
    NotSubsolution { node: String, margin: f64 },
    #[error("subsolution differs from the boundary data by {max_difference:e}")]
    BoundaryMismatch { max_difference: f64 },
    #[error("no damping factor keeps the iterate admissible and lowers the residual {residual:e} at t = {t}")]
    NoDamping { t: f64, residual: f64 },
    #[error("Newton did not reach the tolerance at t = {t} (residual {residual:e})")]
    Stall { t: f64, residual: f64 },
    #[error("continuity path stalled at t = {t} with residual {residual:e}: {cause}")]
    PathStall { t: f64, residual: f64, cause: String },
    #[error("tangential block of g - g_sub reaches {gap:e} on the boundary (tolerance {tolerance:e})")]
    TangentialCheck { gap: f64, tolerance: f64 },
    #[error("barrier: {0}")]
    Barrier(String),
    #[error("field file: {0}")]
    Format(String),
}
