//! Compressions `Uᴴ * A * U` and the phase bounds they obey.

use serde::Serialize;

use super::CHECK_TOL;
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::phase::{decompose_matrix, matrix_phases, ClassifyOptions, PhaseVector};
use crate::tensor::{DenseTensor, Shape};

/// Allowed `‖Uᴴ U − I‖_max` for a column-orthogonal compressor.
const ORTHOGONALITY_TOL: f64 = 1e-8;

fn congruence(a: &DenseTensor, c: &DenseTensor) -> Result<DenseTensor> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("expected an even-order square tensor, got {}", a.shape())));
    }
    if c.row_dims() != a.col_dims() {
        return Err(Error::shape(format!("compressor {} does not fit {}", c.shape(), a.shape())));
    }
    c.conj_transpose().einstein_product(a)?.einstein_product(c)
}

/// `Uᴴ * A * U` for a column-orthogonal `U`.
pub fn compress(a: &DenseTensor, u: &DenseTensor) -> Result<DenseTensor> {
    if u.shape().cols() > u.shape().rows() {
        return Err(Error::shape(format!("compressor {} has more columns than rows", u.shape())));
    }
    let gram = u.unfold().adjoint().mul(u.unfold());
    let dev = gram.max_abs_diff(&Matrix::identity(gram.rows()));
    if dev > ORTHOGONALITY_TOL {
        return Err(Error::Precondition(format!("compressor is not column orthogonal (deviation {dev:.2e}); orthonormalize it with qr first")));
    }
    congruence(a, u)
}

#[derive(Clone, Debug, Serialize)]
pub struct InterlacingReport {
    pub check: &'static str,
    pub ok: bool,
    /// `Φ_i(A) − Φ_i(Ã)` then `Φ_i(Ã) − Φ_{i+|I|−|J|}(A)` for each `i`.
    pub margins: Vec<f64>,
    /// 1-based indices `i` with a margin below `−1e−6`.
    pub violations: Vec<usize>,
    pub phases: Vec<f64>,
    pub compressed_phases: Vec<f64>,
}

/// Checks `Φ_i(A) ≥ Φ_i(Cᴴ*A*C) ≥ Φ_{i+|I|−|J|}(A)`. `C` may be any tensor of
/// full column rank, not only a column-orthogonal one.
pub fn check_interlacing(a: &DenseTensor, c: &DenseTensor) -> Result<InterlacingReport> {
    let outer = matrix_phases(a.unfold(), ClassifyOptions::default())?;
    let compressed = congruence(a, c)?;
    let (_, sigma_min) = numerics::svd_extremes(c.unfold())?;
    if sigma_min <= f64::EPSILON * c.frobenius_norm() {
        return Err(Error::RankDeficient("compressor does not have full column rank".into()));
    }
    let inner = matrix_phases(compressed.unfold(), ClassifyOptions::default())
        .map_err(|e| Error::numeric(format!("compression was not found sectorial: {e}")))?
        .aligned_to(outer.gamma);
    let (n, m) = (outer.len(), inner.len());
    let mut margins = Vec::with_capacity(2 * m);
    let mut violations = Vec::new();
    for i in 0..m {
        let upper = outer.phases[i] - inner.phases[i];
        let lower = inner.phases[i] - outer.phases[i + n - m];
        if upper < -CHECK_TOL || lower < -CHECK_TOL {
            violations.push(i + 1);
        }
        margins.push(upper);
        margins.push(lower);
    }
    Ok(InterlacingReport {
        check: "interlacing",
        ok: violations.is_empty(),
        margins,
        violations,
        phases: outer.phases,
        compressed_phases: inner.phases,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SumExtremesReport {
    pub check: &'static str,
    pub ok: bool,
    /// Attained minus expected, for the maximizer then the minimizer; a
    /// probe adds `bound − probe sum` and `probe sum − lower bound`.
    pub margins: Vec<f64>,
    pub max_attained: f64,
    pub max_expected: f64,
    pub min_attained: f64,
    pub min_expected: f64,
    pub probe_sum: Option<f64>,
}

/// Extremal sums of the leading `I₁⋯I_L` phases over compressions to the
/// first `L` modes. Builds the maximizer `X = T⁻¹ * (I⁰)ᴴ` from `A = Tᴴ*D*T`
/// with `D` sorted descending (ascending for the minimizer), and checks an
/// optional probe `X` against both bounds.
pub fn sum_phase_extremes_check(a: &DenseTensor, l: usize, probe: Option<&DenseTensor>) -> Result<SumExtremesReport> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("expected an even-order square tensor, got {}", a.shape())));
    }
    let dims = a.row_dims();
    if l < 1 || l >= dims.len() {
        return Err(Error::shape(format!("L = {l} must lie in 1..{}", dims.len())));
    }
    let lead = &dims[..l];
    let p: usize = lead.iter().product();
    let xshape = Shape::new(dims.to_vec(), lead.to_vec())?;
    let opts = ClassifyOptions::default();
    let phases = matrix_phases(a.unfold(), opts)?;
    let n = phases.len();
    let max_expected: f64 = phases.phases[..p].iter().sum();
    let min_expected: f64 = phases.phases[n - p..].iter().sum();

    // (I⁰)ᴴ selects the first p ivec slots, so X is the first p columns of T⁻¹.
    let leading: Vec<usize> = (0..p).collect();
    let attained = |ascending: bool| -> Result<f64> {
        let dec = decompose_matrix(a.unfold(), opts, ascending)?;
        let x = DenseTensor::fold(dec.q_inv.columns(&leading), xshape.clone())?;
        compressed_sum(a, &x, phases.gamma)
    };
    let max_attained = attained(false)?;
    let min_attained = attained(true)?;
    let mut margins = vec![max_attained - max_expected, min_attained - min_expected];
    let mut ok = margins.iter().all(|m| m.abs() <= CHECK_TOL);

    let probe_sum = match probe {
        Some(x) => {
            if x.shape() != &xshape {
                return Err(Error::shape(format!("probe must have shape {xshape}, got {}", x.shape())));
            }
            let s = compressed_sum(a, x, phases.gamma)?;
            margins.push(max_expected - s);
            margins.push(s - min_expected);
            ok &= max_expected - s >= -CHECK_TOL && s - min_expected >= -CHECK_TOL;
            Some(s)
        }
        None => None,
    };
    Ok(SumExtremesReport {
        check: "sum_phase_extremes",
        ok,
        margins,
        max_attained,
        max_expected,
        min_attained,
        min_expected,
        probe_sum,
    })
}

fn compressed_sum(a: &DenseTensor, x: &DenseTensor, center: f64) -> Result<f64> {
    let c = congruence(a, x)?;
    let p: PhaseVector = matrix_phases(c.unfold(), ClassifyOptions::default())?.aligned_to(center);
    Ok(p.phases.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::C64;
    use crate::tensor::random::{random_column_orthogonal, random_sectorial};

    fn diag(angles: &[f64], dims: &[usize]) -> DenseTensor {
        let d: Vec<C64> = angles.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        DenseTensor::diagonal(dims, &d).unwrap()
    }

    #[test]
    fn selector_on_diagonal() {
        let a = diag(&[0.9, 0.5, 0.1, -0.3], &[4]);
        let mut u = DenseTensor::zeros(Shape::new(vec![4], vec![2]).unwrap());
        u.set(&[2], &[1], C64::new(1.0, 0.0)).unwrap();
        u.set(&[3], &[2], C64::new(1.0, 0.0)).unwrap();
        let c = compress(&a, &u).unwrap();
        assert_eq!(c, diag(&[0.5, 0.1], &[2]));
        let r = check_interlacing(&a, &u).unwrap();
        assert!(r.ok);
        assert!((r.compressed_phases[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_orthogonal_compressor_rejected() {
        let a = DenseTensor::identity(&[3]).unwrap();
        let u = DenseTensor::new(Shape::new(vec![3], vec![1]).unwrap(), vec![C64::new(2.0, 0.0); 3]).unwrap();
        assert!(matches!(compress(&a, &u), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_interlacing() {
        for seed in 0..20 {
            let a = random_sectorial(&[2, 4], (-1.2, 1.0), seed).unwrap().tensor;
            let u = random_column_orthogonal(&Shape::new(vec![2, 4], vec![2, 2]).unwrap(), seed + 100).unwrap();
            let r = check_interlacing(&a, &u).unwrap();
            assert!(r.ok, "seed {seed}: {:?}", r.margins);
        }
    }

    #[test]
    fn extremes_attained() {
        let r = sum_phase_extremes_check(&DenseTensor::identity(&[2, 2]).unwrap().scalar_mul(C64::from_polar(1.0, 0.4)), 1, None).unwrap();
        assert!(r.ok && (r.max_attained - 0.8).abs() < 1e-9);
        for seed in 0..10 {
            let a = random_sectorial(&[2, 3], (-0.7, 1.4), seed).unwrap().tensor;
            let probe = random_column_orthogonal(&Shape::new(vec![2, 3], vec![2]).unwrap(), seed).unwrap();
            let r = sum_phase_extremes_check(&a, 1, Some(&probe)).unwrap();
            assert!(r.ok, "seed {seed}: {:?}", r.margins);
        }
    }
}
