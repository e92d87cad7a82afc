//! Hand-built reference tensors: a 4-phase sectorial tensor with known
//! phases and a quasi-sectorial tensor of shape `(3×2)×(3×2)` built around it.
//!
//! Both are given slice by slice. Slice `(a, b)` holds the entries with
//! `i₂ = a`, `i₁ = b`, and its own row/column index is `(j₂, j₁)`. With the
//! first-index-fastest unfolding this means row `(a, b)` of the unfolding is
//! the slice flattened row by row.

use crate::control::block_2x2;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, C64};
use crate::tensor::{DenseTensor, Shape};

fn unit_phases(thetas: &[f64]) -> Result<[C64; 4]> {
    let t: [f64; 4] = thetas
        .try_into()
        .map_err(|_| Error::domain(format!("expected 4 angles, got {}", thetas.len())))?;
    Ok(t.map(|x| C64::from_polar(1.0, x)))
}

fn core_block(e: [C64; 4]) -> [[C64; 4]; 4] {
    let z = C64::new(0.0, 0.0);
    let [e1, e2, e3, e4] = e;
    [
        [e1, e1, e1, z],
        [e1, e1 + e2, e1, e2],
        [e1, e1, e1 + e3, z],
        [z, e2, z, e4 + e2],
    ]
}

/// `(2×2)×(2×2)` tensor whose phases are exactly the four given angles.
pub fn example1(thetas: &[f64]) -> Result<DenseTensor> {
    let b = core_block(unit_phases(thetas)?);
    DenseTensor::fold_square(Matrix::from_fn(4, 4, |r, c| b[r][c]), &[2, 2])
}

/// `(3×2)×(3×2)` quasi-sectorial tensor of rank 4: the [`example1`] block
/// padded by two zero rows and columns.
pub fn example2(thetas: &[f64]) -> Result<DenseTensor> {
    let b = core_block(unit_phases(thetas)?);
    let m = Matrix::from_fn(6, 6, |r, c| if r < 2 || c < 2 { C64::new(0.0, 0.0) } else { b[r - 2][c - 2] });
    DenseTensor::fold_square(m, &[3, 2])
}

/// Permutation tensor `U` over `(3×2)` with `example2 = Uᴴ * [O O; O example1]_1 * U`.
pub fn example2_unitary() -> DenseTensor {
    // row k of the unfolding is the coordinate vector e_{targets[k]}
    let targets = [0, 2, 3, 1, 4, 5];
    let m = Matrix::from_fn(6, 6, |r, c| if targets[r] == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    DenseTensor::fold_square(m, &[3, 2]).expect("6x6 folds over (3,2)")
}

/// `[O O; O S]_1` with a single zero slot along mode 1, for `S` over `(2×2)`.
pub fn example2_blocked(thetas: &[f64]) -> Result<DenseTensor> {
    let s = example1(thetas)?;
    let zero = |r: Vec<usize>, c: Vec<usize>| Shape::new(r, c).map(DenseTensor::zeros);
    block_2x2(
        &zero(vec![1, 2], vec![1, 2])?,
        &zero(vec![1, 2], vec![2, 2])?,
        &zero(vec![2, 2], vec![1, 2])?,
        &s,
        1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{classify, phases, ClassifyOptions, SectorialClass};

    const THETAS: [f64; 4] = [0.3, 0.7, -0.4, 1.1];

    #[test]
    fn example1_phases_are_the_angles() {
        let p = phases(&example1(&THETAS).unwrap()).unwrap();
        let expected = [1.1, 0.7, 0.3, -0.4];
        for (x, y) in p.phases.iter().zip(expected) {
            assert!((x - y).abs() < 1e-8, "{:?}", p.phases);
        }
    }

    #[test]
    fn example1_slices() {
        let a = example1(&THETAS).unwrap();
        let e = |k: usize| C64::from_polar(1.0, THETAS[k]);
        // slice (a, b) = (1, 2): i₂ = 1, i₁ = 2; its (1, 2) entry is e₁ + e₂
        assert_eq!(a.get(&[2, 1], &[2, 1]).unwrap(), e(0) + e(1));
        // slice (2, 2) entry (2, 1) is 0 and (1, 2) is e₂
        assert_eq!(a.get(&[2, 2], &[1, 2]).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(a.get(&[2, 2], &[2, 1]).unwrap(), e(1));
    }

    #[test]
    fn example2_structure() {
        let t = [0.3, 0.7, 0.4, 1.1];
        let a = example2(&t).unwrap();
        assert_eq!(a.rank(crate::tensor::RANK_TOL).unwrap(), 4);
        let r = classify(&a, ClassifyOptions::default()).unwrap();
        assert_eq!(r.class, SectorialClass::QuasiSectorial);
        let u = example2_unitary();
        let blocked = example2_blocked(&t).unwrap();
        let recon = u.conj_transpose().einstein_product(&blocked).unwrap().einstein_product(&u).unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-15);
    }
}
