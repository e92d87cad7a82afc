//! Seeded generators for test fixtures. Every generator is a pure function
//! of its seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DenseTensor, Shape};
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-like random unitary from the QR of a Gaussian matrix.
pub fn unitary_matrix(n: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        if let Ok((q, _)) = numerics::qr(&gaussian_matrix(n, n, rng)) {
            return q;
        }
    }
}

/// Nonsingular matrix `U₁ Σ U₂` with singular values log-uniform in
/// `[0.5, 2]`, so its condition number never exceeds 4.
pub fn well_conditioned_matrix(n: usize, rng: &mut impl Rng) -> Matrix {
    let u1 = unitary_matrix(n, rng);
    let u2 = unitary_matrix(n, rng);
    let sigma: Vec<C64> = (0..n).map(|_| C64::new(2f64.powf(rng.random_range(-1.0..=1.0)), 0.0)).collect();
    u1.mul(&Matrix::from_diagonal(&sigma)).mul(&u2)
}

pub fn random_tensor(shape: &Shape, seed: u64) -> DenseTensor {
    let mut r = rng(seed);
    let m = gaussian_matrix(shape.rows(), shape.cols(), &mut r);
    DenseTensor::fold(m, shape.clone()).expect("generated to shape")
}

/// Column-orthogonal tensor (`Uᴴ * U = I`); needs `|J| ≤ |I|`.
pub fn random_column_orthogonal(shape: &Shape, seed: u64) -> Result<DenseTensor> {
    if shape.cols() > shape.rows() {
        return Err(Error::shape(format!("{shape} cannot be column orthogonal: |J| > |I|")));
    }
    let mut r = rng(seed);
    loop {
        if let Ok((q, _)) = numerics::qr(&gaussian_matrix(shape.rows(), shape.cols(), &mut r)) {
            return DenseTensor::fold(q, shape.clone());
        }
    }
}

/// Even-order square tensor with condition number at most 4.
pub fn random_nonsingular(dims: &[usize], seed: u64) -> Result<DenseTensor> {
    let shape = Shape::square(dims)?;
    let mut r = rng(seed);
    DenseTensor::fold(well_conditioned_matrix(shape.rows(), &mut r), shape)
}

/// A sectorial tensor `Qᴴ * D * Q` together with its known phases.
#[derive(Clone, Debug)]
pub struct PlantedSectorial {
    pub tensor: DenseTensor,
    pub q: DenseTensor,
    /// Planted angles, sorted descending.
    pub phases: Vec<f64>,
}

/// `Qᴴ * diag(e^{ıθ}) * Q` with a seeded well-conditioned `Q`.
pub fn planted_sectorial(dims: &[usize], angles: &[f64], seed: u64) -> Result<PlantedSectorial> {
    let shape = Shape::square(dims)?;
    if angles.len() != shape.rows() {
        return Err(Error::shape(format!("{} angles for |I| = {}", angles.len(), shape.rows())));
    }
    let hi = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = angles.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo >= PI {
        return Err(Error::domain(format!("angle spread {} is not below π", hi - lo)));
    }
    let mut r = rng(seed);
    let q = well_conditioned_matrix(shape.rows(), &mut r);
    let d: Vec<C64> = angles.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let a = q.adjoint().mul(&Matrix::from_diagonal(&d)).mul(&q);
    let mut phases = angles.to_vec();
    phases.sort_by(|x, y| y.total_cmp(x));
    Ok(PlantedSectorial {
        tensor: DenseTensor::fold(a, shape.clone())?,
        q: DenseTensor::fold(q, shape)?,
        phases,
    })
}

/// Sectorial tensor with phases drawn uniformly from `[lo, hi]`.
pub fn random_sectorial(dims: &[usize], (lo, hi): (f64, f64), seed: u64) -> Result<PlantedSectorial> {
    if !(hi >= lo) || hi - lo >= PI {
        return Err(Error::domain(format!("phase interval [{lo}, {hi}] must have width below π")));
    }
    let n: usize = Shape::square(dims)?.rows();
    // angles use a stream separate from the one that builds Q
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let angles: Vec<f64> = (0..n).map(|_| if hi > lo { r.random_range(lo..=hi) } else { lo }).collect();
    planted_sectorial(dims, &angles, seed)
}
