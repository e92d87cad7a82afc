//! Mode-n block tensors and the permutations that relate their unfoldings
//! to ordinary block matrices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::tensor::{DenseTensor, Shape};

/// A permutation of `0..size` acting on vectors by `(P z)[i] = z[image[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationMap {
    image: Vec<usize>,
}

impl PermutationMap {
    pub fn identity(size: usize) -> Self {
        Self { image: (0..size).collect() }
    }

    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::domain(format!("{image:?} is not a permutation")));
            }
        }
        Ok(Self { image })
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    /// 0-based image.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn apply<T: Clone>(&self, z: &[T]) -> Vec<T> {
        assert_eq!(z.len(), self.size(), "permutation size mismatch");
        self.image.iter().map(|&j| z[j].clone()).collect()
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.size(), other.size(), "permutation size mismatch");
        Self { image: self.image.iter().map(|&j| other.image[j]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.size()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Self { image: inv }
    }

    /// `I_outer ⊗ self ⊗ I_inner`, with the outer factor most significant.
    pub fn kron_embed(&self, outer: usize, inner: usize) -> Self {
        let s = self.size();
        let mut image = Vec::with_capacity(outer * s * inner);
        for hi in 0..outer {
            for &mid in &self.image {
                for lo in 0..inner {
                    image.push((hi * s + mid) * inner + lo);
                }
            }
        }
        Self { image }
    }

    pub fn matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.size(), self.size());
        for (i, &j) in self.image.iter().enumerate() {
            m[(i, j)] = crate::numerics::matrix::ONE;
        }
        m
    }

    /// `P M Pᵀ`, computed by index lookup.
    pub fn conjugate(&self, m: &Matrix) -> Matrix {
        assert!(m.rows() == self.size() && m.cols() == self.size(), "permutation size mismatch");
        Matrix::from_fn(m.rows(), m.cols(), |r, c| m[(self.image[r], self.image[c])])
    }
}

/// Perfect shuffle `Π_{q,r}`: stacks the stride-`r` slices
/// `z[0], z[r], …` then `z[1], z[1+r], …`.
pub fn perfect_shuffle(q: usize, r: usize) -> Result<PermutationMap> {
    if q == 0 || r == 0 {
        return Err(Error::domain("perfect shuffle needs q, r ≥ 1"));
    }
    let mut image = Vec::with_capacity(q * r);
    for j in 0..r {
        for m in 0..q {
            image.push(j + m * r);
        }
    }
    Ok(PermutationMap { image })
}

/// Permutation `P` with `unfold([A B; C D]_n) = P [unfold A, unfold B; unfold C, unfold D] Pᵀ`
/// for square blocks over `dims`.
///
/// Block rows carry the block bit as the most significant digit; the block
/// tensor carries it right above mode `n`. Moving it down one mode at a time
/// is a product of shuffles `I ⊗ Π_{2,I_k} ⊗ I`, the one for `k = n+1` acting
/// first on block tensor positions.
pub fn block_unfold_permutation(dims: &[usize], n: usize) -> Result<PermutationMap> {
    check_mode(dims, n)?;
    let total: usize = 2 * dims.iter().product::<usize>();
    let mut p = PermutationMap::identity(total);
    for k in n + 1..=dims.len() {
        let inner: usize = dims[..k - 1].iter().product();
        let outer: usize = dims[k..].iter().product();
        let q = perfect_shuffle(2, dims[k - 1])?.kron_embed(outer, inner);
        p = p.compose(&q);
    }
    Ok(p)
}

/// Generalization of [`block_unfold_permutation`] to the unequal split of
/// mode `n` into `(first, dims[n] − first)`. Position `x` of the block tensor
/// maps to position `image[x]` of `blkdiag`-ordered rows.
pub fn split_unfold_permutation(dims: &[usize], n: usize, first: usize) -> Result<PermutationMap> {
    check_mode(dims, n)?;
    let size = dims[n - 1];
    if first == 0 || first >= size {
        return Err(Error::domain(format!("split {first} of mode {n} must lie in 1..{size}")));
    }
    let mut top = dims.to_vec();
    top[n - 1] = first;
    let mut bottom = dims.to_vec();
    bottom[n - 1] = size - first;
    let top_len: usize = top.iter().product();
    let total: usize = dims.iter().product();
    let image = (0..total)
        .map(|x| {
            let mut digits = digits_of(x, dims);
            if digits[n - 1] < first {
                linear_of(&digits, &top)
            } else {
                digits[n - 1] -= first;
                top_len + linear_of(&digits, &bottom)
            }
        })
        .collect();
    Ok(PermutationMap { image })
}

fn check_mode(dims: &[usize], n: usize) -> Result<()> {
    if n < 1 || n > dims.len() {
        return Err(Error::domain(format!("mode {n} outside 1..={}", dims.len())));
    }
    Ok(())
}

/// 0-based digits of a 0-based linear index, first mode fastest.
fn digits_of(mut x: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let i = x % d;
            x /= d;
            i
        })
        .collect()
}

fn linear_of(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).rev().fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Index map from a source mode box into a larger target box, offsetting
/// mode `n` (1-based) by `offset`.
fn embedding(src: &[usize], dst: &[usize], n: usize, offset: usize) -> Vec<usize> {
    let total: usize = src.iter().product();
    (0..total)
        .map(|x| {
            let mut d = digits_of(x, src);
            d[n - 1] += offset;
            linear_of(&d, dst)
        })
        .collect()
}

/// Row block `[A B]_n`: column mode `n` of the result is the concatenation
/// of the operands' column modes `n`.
pub fn block_row(a: &DenseTensor, b: &DenseTensor, n: usize) -> Result<DenseTensor> {
    let (ar, ac) = (a.row_dims(), a.col_dims());
    let (br, bc) = (b.row_dims(), b.col_dims());
    check_mode(ac, n)?;
    let compatible = ar == br
        && ac.len() == bc.len()
        && ac.iter().zip(bc).enumerate().all(|(k, (x, y))| k == n - 1 || x == y);
    if !compatible {
        return Err(Error::shape(format!("cannot form a mode-{n} row block of {} and {}", a.shape(), b.shape())));
    }
    let mut cols = ac.to_vec();
    cols[n - 1] += bc[n - 1];
    let shape = Shape::new(ar.to_vec(), cols.clone())?;
    let ea = embedding(ac, &cols, n, 0);
    let eb = embedding(bc, &cols, n, ac[n - 1]);
    let mut m = Matrix::zeros(shape.rows(), shape.cols());
    for r in 0..shape.rows() {
        for (c, &t) in ea.iter().enumerate() {
            m[(r, t)] = a.unfold()[(r, c)];
        }
        for (c, &t) in eb.iter().enumerate() {
            m[(r, t)] = b.unfold()[(r, c)];
        }
    }
    DenseTensor::fold(m, shape)
}

/// Column block `[A; B]_n := [Aᵀ Bᵀ]_nᵀ`.
pub fn block_col(a: &DenseTensor, b: &DenseTensor, n: usize) -> Result<DenseTensor> {
    let row = block_row(&transpose(a)?, &transpose(b)?, n)?;
    transpose(&row)
}

/// `[[A B]_n; [C D]_n]_n`.
pub fn block_2x2(a: &DenseTensor, b: &DenseTensor, c: &DenseTensor, d: &DenseTensor, n: usize) -> Result<DenseTensor> {
    block_col(&block_row(a, b, n)?, &block_row(c, d, n)?, n)
}

/// Plain transpose (no conjugation), swapping row and column modes.
fn transpose(t: &DenseTensor) -> Result<DenseTensor> {
    DenseTensor::fold(t.unfold().transpose(), t.shape().transposed())
}
