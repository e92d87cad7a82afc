//! Phases of sectorial tensors: the eigenvalue route `Φ = θ − ½∠λ(B⁻¹Bᴴ)`
//! and the constructive decomposition `A = Qᴴ * D * Q`.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use super::classify::{classify_matrix, wrap_angle, ClassifyOptions, SectorialityReport};
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};
use crate::tensor::DenseTensor;

/// Deviation of `|μ|` from 1 beyond which the result is flagged.
const UNIT_MODULUS_FLAG: f64 = 1e-7;
/// Deviation beyond which the eigenvalue route is abandoned.
const UNIT_MODULUS_FAIL: f64 = 1e-3;

/// Phases sorted descending with their center.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseVector {
    pub phases: Vec<f64>,
    pub gamma: f64,
    /// Rotation `θ` with every phase of `e^{−ıθ} A` inside `(−π/2, π/2)`.
    pub rotation: f64,
    pub ill_conditioned: bool,
}

impl PhaseVector {
    pub fn new(mut phases: Vec<f64>, rotation: f64, ill_conditioned: bool) -> Self {
        phases.sort_by(|a, b| b.total_cmp(a));
        let gamma = match (phases.first(), phases.last()) {
            (Some(hi), Some(lo)) => 0.5 * (hi + lo),
            _ => 0.0,
        };
        Self { phases, gamma, rotation, ill_conditioned }
    }

    pub fn max(&self) -> f64 {
        self.phases[0]
    }

    pub fn min(&self) -> f64 {
        *self.phases.last().expect("nonempty phase vector")
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Shifts every phase by the multiple of 2π that brings the center
    /// closest to `center`.
    pub fn aligned_to(&self, center: f64) -> Self {
        let k = ((center - self.gamma) / TAU).round();
        if k == 0.0 {
            return self.clone();
        }
        let shift = k * TAU;
        Self {
            phases: self.phases.iter().map(|p| p + shift).collect(),
            gamma: self.gamma + shift,
            rotation: self.rotation + shift,
            ill_conditioned: self.ill_conditioned,
        }
    }
}

fn require_sectorial(a: &Matrix, opts: ClassifyOptions) -> Result<SectorialityReport> {
    let report = classify_matrix(a, opts)?;
    if !report.is_sectorial() {
        return Err(Error::NotSectorial);
    }
    Ok(report)
}

/// Phases of a sectorial square matrix.
pub fn matrix_phases(a: &Matrix, opts: ClassifyOptions) -> Result<PhaseVector> {
    phases_from_report(a, &require_sectorial(a, opts)?)
}

/// Phases of `a` given its (sectorial) classification report.
pub(crate) fn phases_from_report(a: &Matrix, report: &SectorialityReport) -> Result<PhaseVector> {
    let theta = report.arc_midpoint().expect("sectorial report carries an arc");
    let b = a.scale(C64::from_polar(1.0, -theta));
    let m = numerics::solve(&b, &b.adjoint())?;
    let mu = numerics::general_eig(&m, false)?.values;
    let worst = mu.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    if worst > UNIT_MODULUS_FAIL {
        return Err(Error::numeric(format!("eigenvalues of B⁻¹Bᴴ are off the unit circle by {worst:.3e}")));
    }
    let phases = mu.iter().map(|z| theta - 0.5 * z.arg()).collect();
    Ok(PhaseVector::new(phases, theta, report.near_boundary || worst > UNIT_MODULUS_FLAG))
}

/// Phases of a sectorial even-order square tensor.
pub fn phases(a: &DenseTensor) -> Result<PhaseVector> {
    phases_with(a, ClassifyOptions::default())
}

pub fn phases_with(a: &DenseTensor, opts: ClassifyOptions) -> Result<PhaseVector> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("phases need an even-order square tensor, got {}", a.shape())));
    }
    matrix_phases(a.unfold(), opts)
}

/// `A = Qᴴ * D * Q`, `D` unitary diagonal with angles sorted descending.
#[derive(Clone, Debug)]
pub struct SectorialDecomposition {
    pub q: DenseTensor,
    pub d: DenseTensor,
    pub angles: Vec<f64>,
    /// Unfolded `Q⁻¹`, known in closed form from the construction.
    q_inv: Matrix,
}

impl SectorialDecomposition {
    pub fn q_inverse(&self) -> &Matrix {
        &self.q_inv
    }

    /// `‖A − Qᴴ * D * Q‖_F`.
    pub fn residual(&self, a: &DenseTensor) -> Result<f64> {
        let q = self.q.unfold();
        let recon = q.adjoint().mul(self.d.unfold()).mul(q);
        Ok(a.unfold().sub(&recon)?.frobenius_norm())
    }
}

/// Unfolded decomposition pieces: `Q`, `Q⁻¹`, angles (descending).
pub(crate) struct MatrixDecomposition {
    pub q: Matrix,
    pub q_inv: Matrix,
    pub angles: Vec<f64>,
}

pub(crate) fn decompose_matrix(a: &Matrix, opts: ClassifyOptions, ascending: bool) -> Result<MatrixDecomposition> {
    let report = require_sectorial(a, opts)?;
    let theta = report.arc_midpoint().expect("sectorial report carries an arc");
    // After rotating by θ − π/2 every phase sits in (0, π): the skew part is positive definite.
    let rot = theta - FRAC_PI_2;
    let b = a.scale(C64::from_polar(1.0, -rot));
    let h = b.hermitian_part();
    let k = b.skew_part();
    let l = numerics::cholesky(&k).map_err(|e| Error::numeric(format!("borderline sectoriality: {e}")))?;
    let n = a.rows();
    let linv = numerics::solve_lower(&l, &Matrix::identity(n));
    let p = linv.adjoint();
    let e = numerics::hermitian_eig(&p.adjoint().mul(&h).mul(&p))?;

    // Cᴴ B C = D₀ + ıI with C = P V; rescale by S = |D₀ + ıI|^{1/2}.
    let mut idx: Vec<usize> = (0..n).collect();
    let raw: Vec<f64> = e.values.iter().map(|&d0| rot + 1.0f64.atan2(d0)).collect();
    if ascending {
        idx.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]).then(i.cmp(&j)));
    } else {
        idx.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]).then(i.cmp(&j)));
    }
    let s: Vec<f64> = e.values.iter().map(|&d0| (d0 * d0 + 1.0).powf(0.25)).collect();

    // Q = S Vᴴ Lᴴ, Q⁻¹ = L⁻ᴴ V S⁻¹, rows/columns permuted to the sorted order.
    let vh_lh = e.vectors.adjoint().mul(&l.adjoint());
    let q = Matrix::from_fn(n, n, |r, c| vh_lh[(idx[r], c)] * s[idx[r]]);
    let p_v = p.mul(&e.vectors);
    let q_inv = Matrix::from_fn(n, n, |r, c| p_v[(r, idx[c])] / s[idx[c]]);
    let angles = idx.iter().map(|&i| raw[i]).collect();
    Ok(MatrixDecomposition { q, q_inv, angles })
}

pub fn sectorial_decomposition(a: &DenseTensor) -> Result<SectorialDecomposition> {
    sectorial_decomposition_with(a, ClassifyOptions::default())
}

pub fn sectorial_decomposition_with(a: &DenseTensor, opts: ClassifyOptions) -> Result<SectorialDecomposition> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("decomposition needs an even-order square tensor, got {}", a.shape())));
    }
    let m = decompose_matrix(a.unfold(), opts, false)?;
    let d: Vec<C64> = m.angles.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    Ok(SectorialDecomposition {
        q: DenseTensor::fold(m.q, a.shape().clone())?,
        d: DenseTensor::diagonal(a.row_dims(), &d)?,
        angles: m.angles,
        q_inv: m.q_inv,
    })
}

/// Unit tensor `X` whose Rayleigh quotient has angle `Φ_i(A)` (1-based `i`).
pub fn phase_witness(a: &DenseTensor, i: usize) -> Result<DenseTensor> {
    let dec = sectorial_decomposition(a)?;
    let n = dec.angles.len();
    if i < 1 || i > n {
        return Err(Error::Range(format!("phase index {i} outside 1..={n}")));
    }
    let col = dec.q_inv.column(i - 1);
    let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let data = col.into_iter().map(|z| z / norm).collect();
    DenseTensor::new(crate::tensor::Shape::vector(a.row_dims())?, data)
}

/// Phase of a nonzero scalar folded into `(−π, π]`.
pub fn scalar_phase(z: C64) -> Result<f64> {
    if z == C64::new(0.0, 0.0) {
        return Err(Error::domain("zero has no phase"));
    }
    Ok(wrap_angle(z.arg()))
}
