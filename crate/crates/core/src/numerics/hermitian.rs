//! Hermitian eigensolver (cyclic complex Jacobi) and the functions of
//! Hermitian matrices built on it.

use super::matrix::{Matrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Ascending real eigenvalues with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// 2×2 unitary acting on a coordinate pair `(p, q)`:
/// `J = [[jpp, jpq], [jqp, jqq]]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PlaneRotation {
    pub jpp: C64,
    pub jpq: C64,
    pub jqp: C64,
    pub jqq: C64,
}

impl PlaneRotation {
    /// Rotation `J` with `Jᴴ [[app, apq], [conj(apq), aqq]] J` diagonal.
    pub fn jacobi(app: f64, aqq: f64, apq: C64) -> Self {
        let r = apq.norm();
        let phase = if r == 0.0 { C64::new(1.0, 0.0) } else { apq / r };
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            let tau = (aqq - app) / (2.0 * r);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                -1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            (c, t * c)
        };
        let ph = phase.conj();
        Self { jpp: C64::new(c, 0.0), jpq: C64::new(s, 0.0), jqp: ph * -s, jqq: ph * c }
    }

    /// `M <- M J` on columns p, q.
    pub fn apply_right(&self, m: &mut Matrix, p: usize, q: usize) {
        for i in 0..m.rows() {
            let a = m[(i, p)];
            let b = m[(i, q)];
            m[(i, p)] = a * self.jpp + b * self.jqp;
            m[(i, q)] = a * self.jpq + b * self.jqq;
        }
    }

    /// `M <- Jᴴ M` on rows p, q.
    pub fn apply_left_adjoint(&self, m: &mut Matrix, p: usize, q: usize) {
        for j in 0..m.cols() {
            let a = m[(p, j)];
            let b = m[(q, j)];
            m[(p, j)] = self.jpp.conj() * a + self.jqp.conj() * b;
            m[(q, j)] = self.jpq.conj() * a + self.jqq.conj() * b;
        }
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(m: &Matrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    if !m.is_square() {
        return Err(Error::shape("Hermitian eigensolver needs a square matrix"));
    }
    let scale = m.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::numeric("matrix has non-finite entries"));
    }
    let asym = m.sub(&m.adjoint())?.frobenius_norm();
    if asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!("matrix is not Hermitian (‖M − Mᴴ‖ = {asym:.3e})")));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = want_vectors.then(|| Matrix::identity(n));
    let target = f64::EPSILON * scale;

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > target {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::numeric("Jacobi sweeps did not converge"));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let rot = PlaneRotation::jacobi(a[(p, p)].re, a[(q, q)].re, apq);
                rot.apply_right(&mut a, p, q);
                rot.apply_left_adjoint(&mut a, p, q);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if let Some(v) = v.as_mut() {
                    rot.apply_right(v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| v.columns(&order));
    Ok((values, vectors))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(m: &Matrix) -> Result<HermitianEigen> {
    let (values, vectors) = jacobi(m, true)?;
    Ok(HermitianEigen { values, vectors: vectors.expect("vectors requested") })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    Ok(jacobi(m, false)?.0)
}

/// `M^p` for Hermitian positive definite `M`.
pub fn hermitian_power(m: &Matrix, p: f64) -> Result<Matrix> {
    let e = hermitian_eig(m)?;
    if let Some((i, &lam)) = e.values.iter().enumerate().find(|(_, &l)| l <= 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: i, value: lam });
    }
    let n = m.rows();
    let scaled = Matrix::from_fn(n, n, |i, j| e.vectors[(i, j)] * e.values[j].powf(p));
    Ok(scaled.mul(&e.vectors.adjoint()))
}
