//! Dense complex tensors with split row/column modes, the Einstein product,
//! and the unfolding that maps all of it onto matrix algebra.

mod io;
pub mod random;

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};

pub use io::{read_tensor, tensor_from_json, tensor_to_json, write_tensor, TensorJson};

/// Default relative tolerance for [`DenseTensor::rank`].
pub const RANK_TOL: f64 = 1e-10;

/// Row and column mode sizes `(I₁…I_N) × (J₁…J_M)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    rows: usize,
    cols: usize,
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    dims.iter().try_fold(1usize, |acc, &d| {
        if d == 0 {
            return Err(Error::shape("every dimension must be at least 1"));
        }
        acc.checked_mul(d)
            .filter(|&p| u64::try_from(p).is_ok())
            .ok_or_else(|| Error::shape(format!("dimension product of {dims:?} overflows")))
    })
}

impl Shape {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        if row_dims.is_empty() {
            return Err(Error::shape("a tensor needs at least one row mode"));
        }
        let rows = checked_product(&row_dims)?;
        let cols = checked_product(&col_dims)?;
        rows.checked_mul(cols).ok_or_else(|| Error::shape("tensor size overflows"))?;
        Ok(Self { row_dims, col_dims, rows, cols })
    }

    /// Even-order square shape `(dims) × (dims)`.
    pub fn square(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), dims.to_vec())
    }

    /// Vector shape `(dims) × ()`.
    pub fn vector(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), vec![])
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    /// `|I|`, the number of rows of the unfolding.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `|J|`, the number of columns of the unfolding.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_even_square(&self) -> bool {
        self.row_dims == self.col_dims
    }

    pub fn transposed(&self) -> Self {
        Self { row_dims: self.col_dims.clone(), col_dims: self.row_dims.clone(), rows: self.cols, cols: self.rows }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("×");
        write!(f, "({})×({})", join(&self.row_dims), join(&self.col_dims))
    }
}

/// 1-based linear index `i₁ + Σ_{k≥2} (i_k − 1) ∏_{j<k} I_j`; the first
/// mode varies fastest.
pub fn ivec(idx: &[usize], dims: &[usize]) -> Result<usize> {
    if idx.len() != dims.len() {
        return Err(Error::Range(format!("index {idx:?} has the wrong order for dims {dims:?}")));
    }
    let mut lin = 0usize;
    let mut stride = 1usize;
    for (k, (&i, &d)) in idx.iter().zip(dims).enumerate() {
        if i < 1 || i > d {
            return Err(Error::Range(format!("index {i} of mode {} outside 1..={d}", k + 1)));
        }
        lin += (i - 1) * stride;
        stride *= d;
    }
    Ok(lin + 1)
}

/// Inverse of [`ivec`]: the 1-based index tuple at 1-based position `k`.
pub fn ivec_inverse(k: usize, dims: &[usize]) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if k < 1 || k > total {
        return Err(Error::Range(format!("position {k} outside 1..={total}")));
    }
    let mut rest = k - 1;
    Ok(dims
        .iter()
        .map(|&d| {
            let i = rest % d;
            rest /= d;
            i + 1
        })
        .collect())
}

/// Dense complex tensor. The entries are stored as the row-major unfolding,
/// so [`unfold`](Self::unfold) is free.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    mat: Matrix,
}

/// Eigenvalues with multiplicity, and optionally unit eigentensors.
#[derive(Clone, Debug)]
pub struct EigenSet {
    pub values: Vec<C64>,
    pub vectors: Option<Vec<DenseTensor>>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<C64>) -> Result<Self> {
        let mat = Matrix::from_vec(shape.rows(), shape.cols(), data)
            .map_err(|_| Error::shape(format!("entry count does not match shape {shape}")))?;
        Ok(Self { shape, mat })
    }

    pub fn zeros(shape: Shape) -> Self {
        let mat = Matrix::zeros(shape.rows(), shape.cols());
        Self { shape, mat }
    }

    /// Inverse of the unfolding.
    pub fn fold(mat: Matrix, shape: Shape) -> Result<Self> {
        if mat.rows() != shape.rows() || mat.cols() != shape.cols() {
            return Err(Error::shape(format!(
                "a {}x{} matrix does not unfold {shape}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { shape, mat })
    }

    /// Folds a square matrix into the even-order square shape over `dims`.
    pub fn fold_square(mat: Matrix, dims: &[usize]) -> Result<Self> {
        Self::fold(mat, Shape::square(dims)?)
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let shape = Shape::square(dims)?;
        let mat = Matrix::identity(shape.rows());
        Ok(Self { shape, mat })
    }

    pub fn diagonal(dims: &[usize], values: &[C64]) -> Result<Self> {
        let shape = Shape::square(dims)?;
        if values.len() != shape.rows() {
            return Err(Error::shape(format!("{} diagonal values for |I| = {}", values.len(), shape.rows())));
        }
        Ok(Self { shape, mat: Matrix::from_diagonal(values) })
    }

    /// Unit coordinate tensor of shape `(dims) × ()` with a one at 1-based
    /// ivec position `k`.
    pub fn coordinate(dims: &[usize], k: usize) -> Result<Self> {
        let shape = Shape::vector(dims)?;
        if k < 1 || k > shape.rows() {
            return Err(Error::Range(format!("coordinate {k} outside 1..={}", shape.rows())));
        }
        let mut t = Self::zeros(shape);
        t.mat[(k - 1, 0)] = C64::new(1.0, 0.0);
        Ok(t)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn row_dims(&self) -> &[usize] {
        self.shape.row_dims()
    }

    pub fn col_dims(&self) -> &[usize] {
        self.shape.col_dims()
    }

    pub fn is_even_square(&self) -> bool {
        self.shape.is_even_square()
    }

    pub fn unfold(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_unfolded(self) -> Matrix {
        self.mat
    }

    pub fn data(&self) -> &[C64] {
        self.mat.as_slice()
    }

    /// Entry at 1-based row and column index tuples.
    pub fn get(&self, row: &[usize], col: &[usize]) -> Result<C64> {
        let i = ivec(row, self.row_dims())?;
        let j = if self.col_dims().is_empty() && col.is_empty() { 1 } else { ivec(col, self.col_dims())? };
        Ok(self.mat[(i - 1, j - 1)])
    }

    pub fn set(&mut self, row: &[usize], col: &[usize], value: C64) -> Result<()> {
        let i = ivec(row, self.shape.row_dims())?;
        let j = if self.shape.col_dims().is_empty() && col.is_empty() { 1 } else { ivec(col, self.shape.col_dims())? };
        self.mat[(i - 1, j - 1)] = value;
        Ok(())
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_even_square() {
            Ok(())
        } else {
            Err(Error::shape(format!("{what} needs an even-order square tensor, got {}", self.shape)))
        }
    }

    fn with_matrix(&self, mat: Matrix) -> Self {
        Self { shape: self.shape.clone(), mat }
    }

    /// `A *_N B`, contracting the column modes of `self` with the row modes
    /// of `other`.
    pub fn einstein_product(&self, other: &Self) -> Result<Self> {
        if self.col_dims() != other.row_dims() {
            return Err(Error::shape(format!(
                "cannot contract {} with {}: column modes {:?} differ from row modes {:?}",
                self.shape,
                other.shape,
                self.col_dims(),
                other.row_dims()
            )));
        }
        let shape = Shape::new(self.row_dims().to_vec(), other.col_dims().to_vec())?;
        Ok(Self { shape, mat: self.mat.matmul(&other.mat)? })
    }

    pub fn conj_transpose(&self) -> Self {
        Self { shape: self.shape.transposed(), mat: self.mat.adjoint() }
    }

    pub fn scalar_mul(&self, c: C64) -> Self {
        self.with_matrix(self.mat.scale(c))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(self.mat.add(&other.mat)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(self.mat.sub(&other.mat)?))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape(format!("shapes {} and {} differ", self.shape, other.shape)));
        }
        Ok(())
    }

    /// `(A + Aᴴ)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        self.require_square("Hermitian part")?;
        Ok(self.with_matrix(self.mat.hermitian_part()))
    }

    /// `(A − Aᴴ)/(2ı)`.
    pub fn skew_part(&self) -> Result<Self> {
        self.require_square("skew part")?;
        Ok(self.with_matrix(self.mat.skew_part()))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        if !self.is_even_square() {
            return false;
        }
        let n = self.mat.rows();
        (0..n).all(|i| (0..n).all(|j| i == j || self.mat[(i, j)].norm() <= tol))
    }

    /// Diagonal entries `d_{i…i i…i}` in ivec order.
    pub fn diagonal_entries(&self) -> Result<Vec<C64>> {
        self.require_square("diagonal entries")?;
        Ok(self.mat.diagonal())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square("inverse")?;
        Ok(self.with_matrix(numerics::inverse(&self.mat)?))
    }

    pub fn eigenvalues(&self, want_vectors: bool) -> Result<EigenSet> {
        self.require_square("eigenvalues")?;
        let e = numerics::general_eig(&self.mat, want_vectors)?;
        let vectors = match e.vectors {
            Some(v) => {
                let shape = Shape::vector(self.row_dims())?;
                let tensors = (0..v.cols())
                    .map(|k| DenseTensor::new(shape.clone(), v.column(k)))
                    .collect::<Result<Vec<_>>>()?;
                Some(tensors)
            }
            None => None,
        };
        Ok(EigenSet { values: e.values, vectors })
    }

    /// Product of the eigenvalues.
    pub fn determinant(&self) -> Result<C64> {
        Ok(self.eigenvalues(false)?.values.iter().product())
    }

    /// Number of singular values of the unfolding above `tol · σ_max`.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        if self.mat.max_abs() == 0.0 {
            return Ok(0);
        }
        Ok(numerics::svd(&self.mat)?.rank(tol))
    }

    /// `⟨X, Y⟩ = Yᴴ * X`.
    pub fn frobenius_inner(&self, other: &Self) -> Result<C64> {
        self.same_shape(other)?;
        Ok(other.data().iter().zip(self.data()).map(|(y, x)| y.conj() * x).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    /// `A = Q * R` with `Q` column orthogonal and the unfolding of `R`
    /// upper triangular with real nonnegative diagonal.
    pub fn qr(&self) -> Result<(Self, Self)> {
        let (q, r) = numerics::qr(&self.mat)?;
        let q = Self::fold(q, self.shape.clone())?;
        let r = Self::fold(r, Shape::new(self.col_dims().to_vec(), self.col_dims().to_vec())?)?;
        Ok((q, r))
    }

    /// `X = U * P` with `U` column orthogonal and `P` Hermitian positive
    /// definite.
    pub fn polar(&self) -> Result<(Self, Self)> {
        let (u, p) = numerics::polar(&self.mat)?;
        let u = Self::fold(u, self.shape.clone())?;
        let p = Self::fold(p, Shape::new(self.col_dims().to_vec(), self.col_dims().to_vec())?)?;
        Ok((u, p))
    }

    /// `Xᴴ * A * X` for a unit vector tensor `X`.
    pub fn rayleigh(&self, x: &Self) -> Result<C64> {
        self.einstein_product(x)?.frobenius_inner(x)
    }
}
