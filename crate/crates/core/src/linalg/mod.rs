//! Small dense Hermitian algebra and a matrix-free Krylov solver.

mod hermitian;
mod krylov;

pub use hermitian::{EigenDecomposition, EigenError, HermitianMatrix};
pub use krylov::{bicgstab, KrylovError, KrylovStats, LinearOperator};
