//! Numerical toolkit for fully nonlinear complex Hessian equations
//! `f(lambda(chi + i dd-bar u)) = psi`.
//!
//! - [`arrowhead`]: eigenvalue concentration for Hermitian arrowhead matrices.
//! - [`cone`]: concave symmetric functions on Garding cones and their level sets.
//! - [`solver`]: continuity-method finite-difference solver on the flat model
//!   `T^{n-1} x (S^1 x [0, 1])`, its real-Hessian sibling and a priori
//!   estimate diagnostics.
//!
//! The arrowhead and cone modules are generic over [`Scalar`] (`f32` or
//! `f64`); the solver works in `f64`, which its tolerances are calibrated
//! for. The aliases below fix `f64`.

pub mod arrowhead;
pub mod cone;
pub mod linalg;
pub mod scalar;
pub mod solver;

pub use scalar::Scalar;

pub type ArrowheadSpec = arrowhead::ArrowheadSpec<f64>;
pub type Spectrum = arrowhead::Spectrum<f64>;
pub type ConcentrationReport = arrowhead::ConcentrationReport<f64>;
pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
pub type Lambda = cone::Lambda<f64>;
pub type LevelSetPoint = cone::LevelSetPoint<f64>;
pub type SubsolutionGapSpec = cone::SubsolutionGapSpec<f64>;

pub use solver::{GridGeometry, Problem, ScalarField, SolveConfig, SolveReport, SolverError};
