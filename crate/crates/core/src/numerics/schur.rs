//! Complex Schur decomposition: Householder reduction to Hessenberg form
//! followed by single-shift QR sweeps with Wilkinson shifts.

use super::matrix::{Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Iteration budget per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// `M = Z T Zᴴ` with `Z` unitary and `T` upper triangular.
#[derive(Clone, Debug)]
pub struct SchurResult {
    pub z: Matrix,
    pub t: Matrix,
    pub eigenvalues: Vec<C64>,
}

/// Eigenvalues (and optionally unit right eigenvectors, stored as columns)
/// of a general complex matrix.
#[derive(Clone, Debug)]
pub struct GeneralEigen {
    pub values: Vec<C64>,
    pub vectors: Option<Matrix>,
}

/// Givens rotation `G = [[c, s], [-s̄, c]]` with real `c`, chosen so that
/// `G [x; y] = [r; 0]`.
#[derive(Clone, Copy, Debug)]
struct Givens {
    c: f64,
    s: C64,
}

impl Givens {
    fn zeroing(x: C64, y: C64) -> Self {
        if y == ZERO {
            return Self { c: 1.0, s: ZERO };
        }
        let ax = x.norm();
        let ay = y.norm();
        if ax == 0.0 {
            return Self { c: 0.0, s: y.conj() / ay };
        }
        let norm = ax.hypot(ay);
        let phase = x / ax;
        Self { c: ax / norm, s: phase * y.conj() / norm }
    }

    /// Rows `k, k+1` of `m`, columns in `cols`.
    fn apply_left(&self, m: &mut Matrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let a = m[(k, j)];
            let b = m[(k + 1, j)];
            m[(k, j)] = a * self.c + self.s * b;
            m[(k + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Columns `k, k+1` of `m` multiplied by `Gᴴ`, rows in `rows`.
    fn apply_right_adjoint(&self, m: &mut Matrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let a = m[(i, k)];
            let b = m[(i, k + 1)];
            m[(i, k)] = a * self.c + b * self.s.conj();
            m[(i, k + 1)] = -a * self.s + b * self.c;
        }
    }
}

/// Householder reduction `M = Q H Qᴴ`, `H` upper Hessenberg.
pub fn hessenberg(m: &Matrix) -> Result<(Matrix, Matrix)> {
    if !m.is_square() {
        return Err(Error::shape("Hessenberg reduction needs a square matrix"));
    }
    let n = m.rows();
    let mut h = m.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = super::matrix::vec_norm(&v);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0] == ZERO { ONE } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = super::matrix::vec_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // H <- (I - 2vvᴴ) H on rows k+1..n
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * s * 2.0;
            }
        }
        // H <- H (I - 2vvᴴ) and Q <- Q (I - 2vvᴴ) on columns k+1..n
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let s: C64 = v.iter().enumerate().map(|(t, vi)| target[(i, k + 1 + t)] * vi).sum();
                for (t, vi) in v.iter().enumerate() {
                    target[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    Ok((h, q))
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form of a square matrix.
pub fn schur(m: &Matrix) -> Result<SchurResult> {
    let n = m.rows();
    let (mut h, mut z) = hessenberg(m)?;
    let scale = m.frobenius_norm();
    if n == 0 {
        return Ok(SchurResult { z, t: h, eigenvalues: vec![] });
    }
    if !scale.is_finite() {
        return Err(Error::numeric("matrix has non-finite entries"));
    }
    let eps = f64::EPSILON;
    let floor = eps * scale.max(f64::MIN_POSITIVE);

    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= eps * diag || sub <= floor {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::numeric(format!(
                "QR iteration did not converge (active block {lo}..={hi})"
            )));
        }

        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let g = Givens::zeroing(x, y);
            let first_col = if k > lo { k - 1 } else { k };
            g.apply_left(&mut h, k, first_col..n);
            let last_row = (k + 2).min(hi);
            g.apply_right_adjoint(&mut h, k, 0..last_row + 1);
            g.apply_right_adjoint(&mut z, k, 0..n);
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }

    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    let eigenvalues = h.diagonal();
    Ok(SchurResult { z, t: h, eigenvalues })
}

/// Eigenvalues and optional eigenvectors of a general complex matrix.
pub fn general_eig(m: &Matrix, want_vectors: bool) -> Result<GeneralEigen> {
    if !m.is_square() {
        return Err(Error::shape(format!("eigenvalues need a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let s = schur(m)?;
    let vectors = want_vectors.then(|| triangular_eigenvectors(&s));
    Ok(GeneralEigen { values: s.eigenvalues, vectors })
}

/// Back-substitution on the triangular factor, mapped through `Z`.
fn triangular_eigenvectors(s: &SchurResult) -> Matrix {
    let t = &s.t;
    let n = t.rows();
    let small = (f64::EPSILON * t.frobenius_norm()).max(f64::MIN_POSITIVE);
    let mut y_all = Matrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![ZERO; n];
        y[k] = ONE;
        for j in (0..k).rev() {
            let s: C64 = (j + 1..=k).map(|l| t[(j, l)] * y[l]).sum();
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            y[j] = -s / denom;
            // keep the growth in check for nearly defective matrices
            let big = y[j].norm();
            if big > 1e150 {
                for v in y.iter_mut() {
                    *v /= big;
                }
            }
        }
        y_all.set_column(k, &y);
    }
    let mut v = s.z.mul(&y_all);
    for k in 0..n {
        let col = v.column(k);
        let nrm = super::matrix::vec_norm(&col);
        if nrm > 0.0 {
            let scaled: Vec<C64> = col.iter().map(|x| x / nrm).collect();
            v.set_column(k, &scaled);
        }
    }
    v
}
