//! Quasi-sectorial tensors: `W(A)` in a closed sector of angle below π with
//! apex at 0. Such an `A` shares its kernel with `Aᴴ`, so an orthonormal
//! kernel/range split block-diagonalizes it as `blkdiag(0, C_s)` with `C_s`
//! sectorial.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::control::{block_2x2, split_unfold_permutation};
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};
use crate::phase::{classify, matrix_phases, ClassifyOptions, PhaseVector, SectorialClass};
use crate::tensor::{DenseTensor, Shape};

/// Relative size below which singular values count as zero.
pub const KERNEL_TOL: f64 = 1e-8;
/// Smallest scale-free `ε·‖A‖_F` read as strictly positive.
const POSITIVE_FLOOR: f64 = 1e-9;

fn require_quasi(a: &DenseTensor) -> Result<SectorialClass> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("expected an even-order square tensor, got {}", a.shape())));
    }
    let class = classify(a, ClassifyOptions::default())?.class;
    match class {
        SectorialClass::Sectorial | SectorialClass::QuasiSectorial => Ok(class),
        other => Err(Error::Precondition(format!("tensor is {other:?}, not quasi-sectorial"))),
    }
}

/// Orthonormal `(kernel, complement)` column bases of the unfolding.
fn kernel_split(m: &Matrix) -> Result<(Matrix, Matrix)> {
    let (range, null) = numerics::kernel_basis(m, KERNEL_TOL)?;
    Ok((null, range))
}

/// Phases of the sectorial block `C_s = V₁ᴴ A V₁`, `V₁` spanning the
/// orthogonal complement of the kernel.
pub fn quasi_phases(a: &DenseTensor) -> Result<PhaseVector> {
    if require_quasi(a)? == SectorialClass::Sectorial {
        return matrix_phases(a.unfold(), ClassifyOptions::default());
    }
    let m = a.unfold();
    let (_, v1) = kernel_split(m)?;
    if v1.cols() == 0 {
        return Err(Error::domain("the zero tensor has no phases"));
    }
    let cs = v1.adjoint().mul(m).mul(&v1);
    matrix_phases(&cs, ClassifyOptions::default())
        .map_err(|e| Error::numeric(format!("nonzero block is not sectorial: {e}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiInequality {
    pub ok: bool,
    /// Largest `ε` with `e^{−ıα}A + e^{ıα}Aᴴ ≥ ε AᴴA`.
    pub epsilon: f64,
    /// Whether every phase of the sectorial block lies in
    /// `(α − π/2, α + π/2)`; agrees with `ok` away from the window edges.
    pub phases_in_window: bool,
}

/// Largest `ε` with `e^{−ıα}A + e^{ıα}Aᴴ ≥ ε AᴴA`. Both sides vanish on the
/// kernel, so on the complement `ε = λ_min(L⁻¹ M L⁻ᴴ)` with `AᴴA = LLᴴ`.
pub fn quasi_inequality_check(a: &DenseTensor, alpha: f64) -> Result<QuasiInequality> {
    require_quasi(a)?;
    let m = a.unfold();
    let (_, v1) = kernel_split(m)?;
    if v1.cols() == 0 {
        return Err(Error::domain("the zero tensor has no phases"));
    }
    let rot = m.scale(C64::from_polar(1.0, -alpha));
    let lhs = rot.add(&rot.adjoint())?;
    let lhs = v1.adjoint().mul(&lhs).mul(&v1);
    let av = m.mul(&v1);
    let gram = av.adjoint().mul(&av);
    let l = numerics::cholesky(&gram.hermitian_part())?;
    let linv = numerics::solve_lower(&l, &Matrix::identity(l.rows()));
    let epsilon = numerics::lambda_min(&linv.mul(&lhs).mul(&linv.adjoint()).hermitian_part())?;
    let p = quasi_phases(a)?.aligned_to(alpha);
    let phases_in_window = p.max() < alpha + FRAC_PI_2 && p.min() > alpha - FRAC_PI_2;
    let ok = epsilon * m.frobenius_norm() > POSITIVE_FLOOR;
    Ok(QuasiInequality { ok, epsilon, phases_in_window })
}

#[derive(Clone, Debug)]
pub struct QuasiBlocked {
    /// Unitary `U` with `A = U * [O O; O A_s]_n * Uᴴ`.
    pub u: DenseTensor,
    pub a_s: DenseTensor,
    /// `[O O; O A_s]_n`.
    pub blocked: DenseTensor,
    /// `‖A − U * blocked * Uᴴ‖_F`.
    pub residual: f64,
    pub a_s_class: SectorialClass,
}

/// `A = U * [O O; O A_s]_n * Uᴴ` with mode `n` split into
/// `(I_n − J_n, J_n)` and `A_s` over the dims with `I_n` replaced by `J_n`.
/// Needs `rank(A) ≤ (J_n / I_n)·|I|`.
pub fn quasi_blocked_decomposition(a: &DenseTensor, n: usize, jn: usize) -> Result<QuasiBlocked> {
    require_quasi(a)?;
    let dims = a.row_dims();
    if n < 1 || n > dims.len() {
        return Err(Error::domain(format!("mode {n} outside 1..={}", dims.len())));
    }
    let i_n = dims[n - 1];
    if jn < 1 || jn >= i_n {
        return Err(Error::domain(format!("J_n = {jn} must lie in 1..{i_n}")));
    }
    let total = a.shape().rows();
    let keep = total / i_n * jn;
    let drop = total - keep;
    let m = a.unfold();
    let (kernel, _) = kernel_split(m)?;
    let rank = total - kernel.cols();
    if rank > keep {
        return Err(Error::domain(format!(
            "rank {rank} exceeds {keep} = (J_n/I_n)|I|; mode {n} admits no such decomposition"
        )));
    }

    let basis = zero_first_basis(m, &kernel, drop)?;
    let inner = basis.adjoint().mul(m).mul(&basis);
    let tail: Vec<usize> = (drop..total).collect();
    let as_mat = inner.select(&tail, &tail);
    let mut sdims = dims.to_vec();
    sdims[n - 1] = jn;
    let a_s = DenseTensor::fold_square(as_mat, &sdims)?;

    let mut zdims = dims.to_vec();
    zdims[n - 1] = i_n - jn;
    let zero = |r: &[usize], c: &[usize]| Shape::new(r.to_vec(), c.to_vec()).map(DenseTensor::zeros);
    let blocked = block_2x2(&zero(&zdims, &zdims)?, &zero(&zdims, &sdims)?, &zero(&sdims, &zdims)?, &a_s, n)?;

    // unfold(blocked) = P blkdiag(0, A_s) Pᵀ, so unfold(A) = (basis Pᵀ) unfold(blocked) (basis Pᵀ)ᴴ
    let p = split_unfold_permutation(dims, n, i_n - jn)?;
    let u = Matrix::from_fn(total, total, |r, c| basis[(r, p.image()[c])]);
    let u = DenseTensor::fold_square(u, dims)?;
    let recon = u.einstein_product(&blocked)?.einstein_product(&u.conj_transpose())?;
    let residual = recon.sub(a)?.frobenius_norm();
    let a_s_class = classify(&a_s, ClassifyOptions::default())?.class;
    Ok(QuasiBlocked { u, a_s, blocked, residual, a_s_class })
}

/// Unitary basis whose first `drop` columns span part of the kernel. Slots
/// whose row and column are exactly zero are used as coordinate vectors when
/// there are enough of them, which keeps already-blocked input intact.
fn zero_first_basis(m: &Matrix, kernel: &Matrix, drop: usize) -> Result<Matrix> {
    let n = m.rows();
    let zero_slot = |i: usize| (0..n).all(|j| m[(i, j)] == C64::new(0.0, 0.0) && m[(j, i)] == C64::new(0.0, 0.0));
    let zeros: Vec<usize> = (0..n).filter(|&i| zero_slot(i)).collect();
    if zeros.len() >= drop {
        let mut order: Vec<usize> = zeros[..drop].to_vec();
        order.extend((0..n).filter(|i| !zeros[..drop].contains(i)));
        return Ok(Matrix::from_fn(n, n, |r, c| if order[c] == r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }));
    }
    // kernel columns first, then an orthonormal completion
    let full = numerics::kernel_basis(&kernel.adjoint(), KERNEL_TOL)?;
    let mut cols: Vec<Vec<C64>> = (0..kernel.cols()).map(|j| kernel.column(j)).collect();
    cols.extend((0..full.1.cols()).map(|j| full.1.column(j)));
    Ok(Matrix::from_fn(n, n, |r, c| cols[c][r]))
}
