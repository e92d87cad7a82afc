//! Dense complex linear algebra on unfolded matrices.

mod factor;
mod hermitian;
pub mod matrix;
mod schur;
mod svd;

pub use factor::{cholesky, inverse, lu_determinant, polar, qr, solve, solve_lower, MAX_CONDITION};
pub use hermitian::{hermitian_eig, hermitian_eigenvalues, hermitian_power, HermitianEigen};
pub use matrix::{Matrix, C64};
pub use schur::{general_eig, hessenberg, schur, GeneralEigen, SchurResult};
pub use svd::{kernel_basis, svd, svd_extremes, Svd};

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(m: &Matrix) -> crate::error::Result<f64> {
    Ok(hermitian_eigenvalues(m)?.first().copied().unwrap_or(0.0))
}
