//! Triangular factorizations and the solvers built on them.

use super::matrix::{vec_norm, Matrix, C64, ONE, ZERO};
use super::svd::svd;
use crate::error::{Error, Result};

/// Condition estimate above which `inverse` refuses to proceed.
pub const MAX_CONDITION: f64 = 1e12;

/// Lower-triangular `L` with `M = L Lᴴ`.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::shape("Cholesky needs a square matrix"));
    }
    let n = m.rows();
    let a = m.hermitian_part();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// LU factorization with partial pivoting, packed in place.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign_flips: usize,
}

fn lu(m: &Matrix) -> Result<Lu> {
    if !m.is_square() {
        return Err(Error::shape(format!("LU needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign_flips = 0;
    let scale = m.max_abs();
    for k in 0..n {
        let (p, pmax) = (k..n).map(|i| (i, a[(i, k)].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= f64::EPSILON * scale * n as f64 || pmax == 0.0 {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            perm.swap(k, p);
            sign_flips += 1;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            a[(i, k)] = f;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let t = a[(k, j)];
                a[(i, j)] -= f * t;
            }
        }
    }
    Ok(Lu { lu: a, perm, sign_flips })
}

impl Lu {
    fn solve(&self, b: &Matrix) -> Matrix {
        let n = self.lu.rows();
        let mut x = Matrix::zeros(n, b.cols());
        for c in 0..b.cols() {
            let mut y: Vec<C64> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for i in 0..n {
                for k in 0..i {
                    let t = self.lu[(i, k)] * y[k];
                    y[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let t = self.lu[(i, k)] * y[k];
                    y[i] -= t;
                }
                y[i] /= self.lu[(i, i)];
            }
            x.set_column(c, &y);
        }
        x
    }

    fn determinant(&self) -> C64 {
        let d: C64 = self.lu.diagonal().iter().product();
        if self.sign_flips % 2 == 1 {
            -d
        } else {
            d
        }
    }
}

/// Solves `M X = B` by partial-pivoting LU.
pub fn solve(m: &Matrix, b: &Matrix) -> Result<Matrix> {
    if b.rows() != m.rows() {
        return Err(Error::shape(format!("right-hand side has {} rows, expected {}", b.rows(), m.rows())));
    }
    Ok(lu(m)?.solve(b))
}

/// LU determinant; used as an independent check of the eigenvalue product.
pub fn lu_determinant(m: &Matrix) -> Result<C64> {
    match lu(m) {
        Ok(f) => Ok(f.determinant()),
        Err(Error::Singular { .. }) => Ok(ZERO),
        Err(e) => Err(e),
    }
}

/// Inverse of a square matrix whose condition number is at most
/// [`MAX_CONDITION`].
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::shape(format!("inverse needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let condition = svd(m)?.condition();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    solve(m, &Matrix::identity(m.rows()))
}

/// Thin Householder QR of a tall matrix, `R` with real nonnegative diagonal.
pub fn qr(m: &Matrix) -> Result<(Matrix, Matrix)> {
    let (rows, n) = (m.rows(), m.cols());
    if n > rows {
        return Err(Error::shape(format!("QR needs rows ≥ cols, got {rows}x{n}")));
    }
    let scale = m.frobenius_norm();
    let mut r = m.clone();
    let mut reflectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<C64> = (k..rows).map(|i| r[(i, k)]).collect();
        let xnorm = vec_norm(&v);
        if xnorm <= 1e-12 * scale || xnorm == 0.0 {
            return Err(Error::RankDeficient(format!("column {k} is dependent on the preceding ones")));
        }
        let phase = if v[0] == ZERO { ONE } else { v[0] / v[0].norm() };
        v[0] += phase * xnorm;
        let vnorm = vec_norm(&v);
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        for j in k..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * s * 2.0;
            }
        }
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
    let mut q = Matrix::from_fn(rows, n, |i, j| if i == j { ONE } else { ZERO });
    for (k, v) in reflectors.iter().enumerate().rev() {
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * q[(k + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                q[(k + t, j)] -= vi * s * 2.0;
            }
        }
    }
    let mut r_top = Matrix::from_fn(n, n, |i, j| if j >= i { r[(i, j)] } else { ZERO });
    for i in 0..n {
        let d = r_top[(i, i)];
        let phase = if d == ZERO { ONE } else { d / d.norm() };
        for j in 0..n {
            r_top[(i, j)] *= phase.conj();
        }
        for t in 0..rows {
            q[(t, i)] *= phase;
        }
        r_top[(i, i)] = C64::new(r_top[(i, i)].re.max(0.0), 0.0);
    }
    Ok((q, r_top))
}

/// Polar decomposition `M = U P` of a tall full-column-rank matrix.
pub fn polar(m: &Matrix) -> Result<(Matrix, Matrix)> {
    if m.cols() > m.rows() {
        return Err(Error::shape(format!("polar decomposition needs rows ≥ cols, got {}x{}", m.rows(), m.cols())));
    }
    let s = svd(m)?;
    if s.rank(1e-12) < m.cols() {
        return Err(Error::RankDeficient("polar decomposition of a rank-deficient matrix".into()));
    }
    let u = s.u.mul(&s.v.adjoint());
    let n = m.cols();
    let scaled = Matrix::from_fn(n, n, |i, j| s.v[(i, j)] * s.sigma[j]);
    let p = scaled.mul(&s.v.adjoint()).hermitian_part();
    Ok((u, p))
}
