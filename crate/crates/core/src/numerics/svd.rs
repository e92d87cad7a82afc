//! One-sided Jacobi SVD. Slower than bidiagonalization but gives small
//! singular values to high relative accuracy, which the rank and
//! conditioning decisions upstream depend on.

use super::hermitian::PlaneRotation;
use super::matrix::{dot_conj, vec_norm, Matrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U Σ Vᴴ` with `k = min(rows, cols)` singular values in
/// descending order. Columns of `U` paired with a zero singular value are
/// left zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    /// `σ_max / σ_min`, infinite for a singular input.
    pub fn condition(&self) -> f64 {
        let lo = self.min();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            self.max() / lo
        }
    }

    /// Number of singular values above `tol · σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let cut = tol * self.max();
        self.sigma.iter().filter(|&&s| s > cut).count()
    }
}

fn tall_svd(m: &Matrix) -> Result<Svd> {
    let (rows, n) = (m.rows(), m.cols());
    // Work column-wise: store columns contiguously.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v = Matrix::identity(n);
    let eps = f64::EPSILON;
    // columns this small are roundoff; rotating them never settles
    let negligible = (eps * m.frobenius_norm()).powi(2);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = vec_norm(&cols[p]).powi(2);
                let beta = vec_norm(&cols[q]).powi(2);
                let gamma = dot_conj(&cols[p], &cols[q]);
                if alpha.min(beta) <= negligible || gamma.norm() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let rot = PlaneRotation::jacobi(alpha, beta, gamma);
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * rot.jpp + y * rot.jqp;
                    *b = x * rot.jpq + y * rot.jqq;
                }
                rot.apply_right(&mut v, p, q);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::numeric("one-sided Jacobi SVD did not converge"));
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = Matrix::zeros(rows, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            let col: Vec<C64> = cols[j].iter().map(|x| x / s).collect();
            u.set_column(k, &col);
        } else {
            u.set_column(k, &vec![ZERO; rows]);
        }
    }
    Ok(Svd { u, sigma, v: v.columns(&order) })
}

/// Thin singular value decomposition.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if !m.frobenius_norm().is_finite() {
        return Err(Error::numeric("matrix has non-finite entries"));
    }
    if m.rows() >= m.cols() {
        tall_svd(m)
    } else {
        let t = tall_svd(&m.adjoint())?;
        Ok(Svd { u: t.v, sigma: t.sigma, v: t.u })
    }
}

/// `(σ_max, σ_min)`.
pub fn svd_extremes(m: &Matrix) -> Result<(f64, f64)> {
    let s = svd(m)?;
    Ok((s.max(), s.min()))
}

/// Orthonormal basis (as columns) of the numerical null space of a square
/// or wide matrix: right singular vectors with `σ ≤ tol · σ_max`.
pub fn kernel_basis(m: &Matrix, tol: f64) -> Result<(Matrix, Matrix)> {
    let full = if m.rows() >= m.cols() {
        svd(m)?
    } else {
        // pad with zero rows so that V is square
        let mut padded = Matrix::zeros(m.cols(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                padded[(i, j)] = m[(i, j)];
            }
        }
        svd(&padded)?
    };
    let r = full.rank(tol);
    let n = m.cols();
    let range: Vec<usize> = (0..r).collect();
    let null: Vec<usize> = (r..n).collect();
    Ok((full.v.columns(&range), full.v.columns(&null)))
}
