//! How far the phases of `B` can grow before `I + A*B` loses rank.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};
use crate::phase::{decompose_matrix, phases, ClassifyOptions};
use crate::tensor::random::{planted_sectorial, rng, PlantedSectorial};
use crate::tensor::{DenseTensor, Shape};

/// Relative singular value tolerance for the rank of `I + A*B`.
pub const RANK_DROP_TOL: f64 = 1e-7;

fn check_k(a: &DenseTensor, k: usize) -> Result<usize> {
    let n = a.shape().rows();
    if k < 1 || k > n {
        return Err(Error::Range(format!("k = {k} outside 1..={n}")));
    }
    Ok(n)
}

/// `α* = min(kπ − Σ_{i≤k} Φ_i(A), kπ + Σ_{i>|I|−k} Φ_i(A))`: every `B` in
/// `C_k[α]` with `α < α*` keeps `rank(I + A*B) > |I| − k`.
pub fn rank_robustness_threshold(a: &DenseTensor, k: usize) -> Result<f64> {
    let n = check_k(a, k)?;
    let p = phases(a)?;
    let top: f64 = p.phases[..k].iter().sum();
    let bottom: f64 = p.phases[n - k..].iter().sum();
    let kpi = k as f64 * PI;
    Ok((kpi - top).min(kpi + bottom))
}

/// `B = T⁻¹ * E * T⁻ᴴ` from `A = Tᴴ * D * T`, with `∠e_i = π − Φ_i(A)` for
/// the `k` largest phases and `e_i = 1` otherwise, so that `A*B` has `k`
/// eigenvalues at `−1`.
pub fn worst_case_b(a: &DenseTensor, k: usize) -> Result<DenseTensor> {
    let n = check_k(a, k)?;
    let dec = decompose_matrix(a.unfold(), ClassifyOptions::default(), false)?;
    let e: Vec<C64> = (0..n)
        .map(|i| if i < k { C64::from_polar(1.0, PI - dec.angles[i]) } else { C64::new(1.0, 0.0) })
        .collect();
    let b = dec.q_inv.mul(&Matrix::from_diagonal(&e)).mul(&dec.q_inv.adjoint());
    DenseTensor::fold(b, a.shape().clone())
}

#[derive(Clone, Debug, Serialize)]
pub struct RankDrop {
    /// `rank(I + A*B)` at relative tolerance [`RANK_DROP_TOL`].
    pub rank: usize,
    /// Eigenvalues of `A*B` within `tol` of `−1`.
    pub near_minus_one: usize,
}

pub fn rank_drop(a: &DenseTensor, b: &DenseTensor, tol: f64) -> Result<RankDrop> {
    let ab = a.einstein_product(b)?;
    let n = ab.shape().rows();
    let shifted = ab.unfold().add(&Matrix::identity(n))?;
    let s = numerics::svd(&shifted)?;
    let scale = 1.0f64.max(ab.unfold().frobenius_norm());
    let rank = s.sigma.iter().filter(|&&x| x > RANK_DROP_TOL * scale).count();
    let near_minus_one = ab.eigenvalues(false)?.values.iter().filter(|z| (*z + 1.0).norm() <= tol).count();
    Ok(RankDrop { rank, near_minus_one })
}

/// Seeded member of `C_k[α]`: a congruence of a diagonal unitary with every
/// angle in `[−a, a]`, `a = min(α/k, π/2 − 0.05)`.
pub fn random_cone_member(dims: &[usize], k: usize, alpha: f64, seed: u64) -> Result<PlantedSectorial> {
    if k == 0 || alpha < 0.0 {
        return Err(Error::domain("cone member needs k ≥ 1 and α ≥ 0"));
    }
    let n = Shape::square(dims)?.rows();
    let bound = (alpha / k as f64).min(FRAC_PI_2 - 0.05);
    let mut r = rng(seed ^ 0x5bd1_e995);
    let angles: Vec<f64> = (0..n).map(|_| if bound > 0.0 { r.random_range(-bound..=bound) } else { 0.0 }).collect();
    planted_sectorial(dims, &angles, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::random_sectorial;

    #[test]
    fn thresholds_of_scaled_identity() {
        let i = DenseTensor::identity(&[2, 2]).unwrap();
        assert!((rank_robustness_threshold(&i, 1).unwrap() - PI).abs() < 1e-9);
        let r = i.scalar_mul(C64::from_polar(1.0, PI / 4.0));
        assert!((rank_robustness_threshold(&r, 1).unwrap() - 0.75 * PI).abs() < 1e-9);
    }

    #[test]
    fn worst_case_hits_minus_one() {
        let r = DenseTensor::identity(&[3]).unwrap().scalar_mul(C64::from_polar(1.0, 0.7));
        let b = worst_case_b(&r, 1).unwrap();
        let d = rank_drop(&r, &b, 1e-7).unwrap();
        assert_eq!((d.rank, d.near_minus_one), (2, 1));
        let b = worst_case_b(&r, 3).unwrap();
        assert_eq!(rank_drop(&r, &b, 1e-7).unwrap().rank, 0);
        for seed in 0..10 {
            let a = random_sectorial(&[2, 2], (-1.0, 1.3), seed).unwrap().tensor;
            let b = worst_case_b(&a, 2).unwrap();
            let d = rank_drop(&a, &b, 1e-7).unwrap();
            assert_eq!((d.rank, d.near_minus_one), (2, 2), "seed {seed}");
        }
    }

    #[test]
    fn below_threshold_keeps_rank() {
        let a = random_sectorial(&[2, 2], (-1.0, 1.3), 3).unwrap().tensor;
        for k in 1..=2 {
            let alpha = rank_robustness_threshold(&a, k).unwrap() - 0.01;
            for seed in 0..20 {
                let b = random_cone_member(&[2, 2], k, alpha, seed).unwrap().tensor;
                assert!(rank_drop(&a, &b, 1e-7).unwrap().rank > 4 - k);
            }
        }
    }
}
