//! Compound spectra and explicit witnesses for their containment in compound
//! numerical ranges.

use serde::Serialize;

use super::WITNESS_TOL;
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};
use crate::phase::{classify, ClassifyOptions};
use crate::tensor::{DenseTensor, Shape};

/// Largest number of k-subsets enumerated by [`compound_spectrum`].
pub const MAX_SUBSETS: u64 = 1_000_000;

/// Smallest acceptable `σ_min / σ_max` of an eigenvector basis.
const STACK_CONDITION: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct CompoundSpectrum {
    pub k: usize,
    /// Products over k-subsets in lexicographic subset order.
    pub values: Vec<C64>,
}

pub fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    u64::try_from(acc).ok()
}

/// Calls `f` with every increasing k-subset of `0..n`, in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_k(n: usize, k: usize) -> Result<u64> {
    if k < 1 || k > n {
        return Err(Error::Range(format!("k = {k} outside 1..={n}")));
    }
    match binomial(n, k) {
        Some(c) if c <= MAX_SUBSETS => Ok(c),
        _ => Err(Error::Size(format!("C({n}, {k}) exceeds {MAX_SUBSETS} subsets"))),
    }
}

pub fn compound_spectrum(a: &DenseTensor, k: usize) -> Result<CompoundSpectrum> {
    let eig = a.eigenvalues(false)?.values;
    check_k(eig.len(), k)?;
    let mut values = Vec::new();
    for_each_subset(eig.len(), k, |s| values.push(s.iter().map(|&i| eig[i]).product()));
    Ok(CompoundSpectrum { k, values })
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipWitness {
    /// Column-orthogonal compressor of shape `(I) × (k)`.
    #[serde(skip)]
    pub u: DenseTensor,
    /// `∏ λ_i(Uᴴ*A*U)`.
    pub product: C64,
    /// `∏_{m ∈ subset} λ_m(A)`.
    pub expected: C64,
    pub relative_error: f64,
    pub ok: bool,
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::Range("empty eigenvalue subset".into()));
    }
    let mut seen = vec![false; n];
    for &i in subset {
        if i < 1 || i > n || std::mem::replace(&mut seen[i - 1], true) {
            return Err(Error::Range(format!("subset {subset:?} must hold distinct indices in 1..={n}")));
        }
    }
    Ok(())
}

/// Rejects eigenvector bases too ill-conditioned to split into invariant
/// subspaces. A well-conditioned basis makes any choice of columns span an
/// invariant subspace, repeated eigenvalues included.
fn require_diagonalizable(vectors: &Matrix) -> Result<()> {
    let (smax, smin) = numerics::svd_extremes(vectors)?;
    if smin < STACK_CONDITION * smax {
        return Err(Error::numeric("eigenvectors are numerically dependent (defective or clustered eigenvalues)"));
    }
    Ok(())
}

/// Column-orthogonal factor of the polar decomposition of the chosen
/// eigenvector columns.
fn invariant_compressor(vectors: &Matrix, subset: &[usize]) -> Result<Matrix> {
    let cols: Vec<usize> = subset.iter().map(|&i| i - 1).collect();
    Ok(numerics::polar(&vectors.columns(&cols))?.0)
}

fn compressed_det(m: &Matrix, u: &Matrix) -> Result<C64> {
    numerics::lu_determinant(&u.adjoint().mul(m).mul(u))
}

fn relative_gap(x: C64, y: C64) -> f64 {
    (x - y).norm() / y.norm().max(f64::MIN_POSITIVE)
}

/// Witness that `∏_{m∈subset} λ_m(A)` belongs to the compound numerical
/// range: the compressor onto the span of the chosen eigentensors. `subset`
/// holds 1-based positions in the order of [`DenseTensor::eigenvalues`].
pub fn compound_membership_witness(a: &DenseTensor, subset: &[usize]) -> Result<MembershipWitness> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("expected an even-order square tensor, got {}", a.shape())));
    }
    check_subset(a.shape().rows(), subset)?;
    let full = numerics::general_eig(a.unfold(), true)?;
    let vectors = full.vectors.expect("vectors requested");
    require_diagonalizable(&vectors)?;
    let u = invariant_compressor(&vectors, subset)?;
    let product = compressed_det(a.unfold(), &u)?;
    let expected: C64 = subset.iter().map(|&i| full.values[i - 1]).product();
    let relative_error = relative_gap(product, expected);
    Ok(MembershipWitness {
        u: DenseTensor::fold(u, Shape::new(a.row_dims().to_vec(), vec![subset.len()])?)?,
        product,
        expected,
        relative_error,
        ok: relative_error <= WITNESS_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientEntry {
    /// 1-based eigenvalue positions of `A*B⁻¹`.
    pub subset: Vec<usize>,
    pub element: C64,
    /// `∏λ(Uᴴ*A*U) / ∏λ(Uᴴ*B*U)`.
    pub witnessed: C64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientReport {
    pub check: &'static str,
    pub ok: bool,
    pub margins: Vec<f64>,
    pub entries: Vec<QuotientEntry>,
    /// Number of elements of the compound spectrum; `entries` may hold an
    /// evenly spread subset of them.
    pub total: u64,
}

/// Witnesses each checked element of `Λ_(k)(A*B⁻¹)` as a quotient of
/// compressed determinants of `A` and `B`, using left eigenvectors of
/// `A*B⁻¹`. At most `samples` elements are checked, spread evenly over the
/// lexicographic subset order.
pub fn quotient_containment_check(a: &DenseTensor, b: &DenseTensor, k: usize, samples: usize) -> Result<QuotientReport> {
    if a.shape() != b.shape() || !a.is_even_square() {
        return Err(Error::shape(format!("need two even-order square tensors of one shape, got {} and {}", a.shape(), b.shape())));
    }
    if !classify(b, ClassifyOptions::default())?.is_sectorial() {
        return Err(Error::Precondition("B must be sectorial".into()));
    }
    let ma = a.unfold();
    let mb = b.unfold();
    let m = ma.mul(&numerics::inverse(mb)?);
    // left eigenvectors of M are the eigenvectors of Mᴴ
    let left = numerics::general_eig(&m.adjoint(), true)?;
    let values: Vec<C64> = left.values.iter().map(|z| z.conj()).collect();
    let vectors = left.vectors.expect("vectors requested");
    let n = values.len();
    let total = check_k(n, k)?;
    require_diagonalizable(&vectors)?;
    let take = (samples as u64).min(total).max(1);
    let mut picks = (0..take).map(|j| j * total / take).peekable();
    let mut chosen = Vec::new();
    let mut pos = 0u64;
    for_each_subset(n, k, |s| {
        if picks.peek() == Some(&pos) {
            picks.next();
            chosen.push(s.iter().map(|&i| i + 1).collect::<Vec<_>>());
        }
        pos += 1;
    });
    let mut entries = Vec::with_capacity(chosen.len());
    for subset in chosen {
        let u = invariant_compressor(&vectors, &subset)?;
        let witnessed = compressed_det(ma, &u)? / compressed_det(mb, &u)?;
        let element: C64 = subset.iter().map(|&i| values[i - 1]).product();
        entries.push(QuotientEntry { relative_error: relative_gap(witnessed, element), subset, element, witnessed });
    }
    let margins: Vec<f64> = entries.iter().map(|e| WITNESS_TOL - e.relative_error).collect();
    Ok(QuotientReport { check: "quotient_containment", ok: margins.iter().all(|&m| m >= 0.0), margins, entries, total })
}
