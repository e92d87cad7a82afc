//! Continuous-time MLTI systems `Ẋ = A*X + B*U`, `Y = C*X + D*U` and their
//! transfer tensors `G(s) = D + C * (sI − A)⁻¹ * B`.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, C64};
use crate::tensor::random::rng;
use crate::tensor::{DenseTensor, Shape, TensorJson};

/// Largest real part an eigenvalue of `A` may have for the system to count
/// as internally stable.
pub const STABILITY_MARGIN: f64 = -1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MltiSystem {
    a: DenseTensor,
    b: DenseTensor,
    c: DenseTensor,
    d: DenseTensor,
}

/// On-disk system: the four tensors under keys `A`, `B`, `C`, `D`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemJson {
    #[serde(rename = "A")]
    pub a: TensorJson,
    #[serde(rename = "B")]
    pub b: TensorJson,
    #[serde(rename = "C")]
    pub c: TensorJson,
    #[serde(rename = "D")]
    pub d: TensorJson,
}

impl From<&MltiSystem> for SystemJson {
    fn from(s: &MltiSystem) -> Self {
        Self { a: (&s.a).into(), b: (&s.b).into(), c: (&s.c).into(), d: (&s.d).into() }
    }
}

impl MltiSystem {
    /// All four tensors must share one even-order square shape.
    pub fn new(a: DenseTensor, b: DenseTensor, c: DenseTensor, d: DenseTensor) -> Result<Self> {
        if !a.is_even_square() {
            return Err(Error::shape(format!("A must be even-order square, got {}", a.shape())));
        }
        for (name, t) in [("B", &b), ("C", &c), ("D", &d)] {
            if t.shape() != a.shape() {
                return Err(Error::shape(format!("{name} has shape {}, A has {}", t.shape(), a.shape())));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// Memoryless system `G(s) = D`, realized with `A = −I` and `B = C = O`.
    pub fn static_gain(d: DenseTensor) -> Result<Self> {
        if !d.is_even_square() {
            return Err(Error::shape(format!("D must be even-order square, got {}", d.shape())));
        }
        let zero = DenseTensor::zeros(d.shape().clone());
        let a = DenseTensor::identity(d.row_dims())?.scalar_mul(C64::new(-1.0, 0.0));
        Self::new(a, zero.clone(), zero, d)
    }

    /// `k/(s + p) · I` realized as `A = −pI`, `B = I`, `C = kI`, `D = O`.
    pub fn first_order(dims: &[usize], k: f64, p: f64) -> Result<Self> {
        let i = DenseTensor::identity(dims)?;
        let zero = DenseTensor::zeros(i.shape().clone());
        Self::new(i.scalar_mul(C64::new(-p, 0.0)), i.clone(), i.scalar_mul(C64::new(k, 0.0)), zero)
    }

    pub fn a(&self) -> &DenseTensor {
        &self.a
    }

    pub fn b(&self) -> &DenseTensor {
        &self.b
    }

    pub fn c(&self) -> &DenseTensor {
        &self.c
    }

    pub fn d(&self) -> &DenseTensor {
        &self.d
    }

    pub fn dims(&self) -> &[usize] {
        self.a.row_dims()
    }

    pub fn shape(&self) -> &Shape {
        self.a.shape()
    }

    /// Eigenvalues of `A`.
    pub fn poles(&self) -> Result<Vec<C64>> {
        Ok(self.a.eigenvalues(false)?.values)
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.poles()?.iter().all(|z| z.re < STABILITY_MARGIN))
    }

    pub(crate) fn require_stable(&self, what: &str) -> Result<()> {
        if !self.is_stable()? {
            return Err(Error::domain(format!("{what} is not internally stable")));
        }
        Ok(())
    }

    /// True when every entry of every tensor has zero imaginary part.
    pub fn is_real(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d].iter().all(|t| t.data().iter().all(|z| z.im == 0.0))
    }

    /// `G(s)`; fails with a pole error when `sI − A` is singular.
    pub fn transfer_at(&self, s: C64) -> Result<DenseTensor> {
        let m = transfer_matrix(self.a.unfold(), self.b.unfold(), self.c.unfold(), self.d.unfold(), s)?;
        DenseTensor::fold(m, self.shape().clone())
    }

    /// `G(ıω)`, with `ω = +∞` giving `D`.
    pub fn response(&self, omega: f64) -> Result<DenseTensor> {
        if omega == f64::INFINITY {
            return Ok(self.d.clone());
        }
        self.transfer_at(C64::new(0.0, omega))
    }

    pub fn to_json(&self) -> String {
        crate::fmt::to_json(&SystemJson::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: SystemJson = serde_json::from_str(text)?;
        let fmt_err = |e: Error| Error::Format(e.to_string());
        Self::new(j.a.try_into()?, j.b.try_into()?, j.c.try_into()?, j.d.try_into()?).map_err(fmt_err)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

pub(crate) fn transfer_matrix(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, s: C64) -> Result<Matrix> {
    let n = a.rows();
    let shifted = Matrix::identity(n).scale(s).sub(a)?;
    let x = numerics::solve(&shifted, b).map_err(|e| match e {
        Error::Singular { .. } => Error::Pole(format!("s = {s} is an eigenvalue of A")),
        other => other,
    })?;
    c.mul(&x).add(d)
}

fn real_gaussian(n: usize, scale: f64, r: &mut impl Rng) -> Matrix {
    Matrix::from_fn(n, n, |_, _| C64::new(scale * r.sample::<f64, _>(StandardNormal), 0.0))
}

fn fold_all(dims: &[usize], m: [Matrix; 4]) -> Result<MltiSystem> {
    let [a, b, c, d] = m.map(|x| DenseTensor::fold_square(x, dims));
    MltiSystem::new(a?, b?, c?, d?)
}

/// Seeded real system with every pole at real part between `−1.5` and
/// `−0.1`. `A` is a Gaussian matrix shifted left past its spectral abscissa.
pub fn random_stable_system(dims: &[usize], seed: u64) -> Result<MltiSystem> {
    let n = Shape::square(dims)?.rows();
    let mut r = rng(seed ^ 0x2545_f491_4f6c_dd1d);
    let scale = 1.0 / (n as f64).sqrt();
    let m = real_gaussian(n, scale, &mut r);
    let abscissa = numerics::general_eig(&m, false)?.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let shift = abscissa + r.random_range(0.1..1.5);
    let a = m.sub(&Matrix::identity(n).scale_real(shift))?;
    let b = real_gaussian(n, scale, &mut r);
    let c = real_gaussian(n, scale, &mut r);
    let d = real_gaussian(n, r.random_range(0.0..0.8) * scale, &mut r);
    fold_all(dims, [a, b, c, d])
}

/// Seeded real strictly positive real system: `A = −(MMᵀ + I) + S` with `S`
/// skew, `C = Bᵀ` and `D = δI + NNᵀ`, so `Herm G(ıω) ≥ δI` at every `ω`.
pub fn random_passive_system(dims: &[usize], seed: u64) -> Result<MltiSystem> {
    let n = Shape::square(dims)?.rows();
    let mut r = rng(seed ^ 0x6a09_e667_f3bc_c909);
    let scale = 1.0 / (n as f64).sqrt();
    let m = real_gaussian(n, scale, &mut r);
    let s = real_gaussian(n, scale, &mut r);
    let a = m.mul(&m.transpose()).add(&Matrix::identity(n))?.scale_real(-1.0).add(&s.sub(&s.transpose())?)?;
    let b = real_gaussian(n, scale, &mut r);
    let c = b.transpose();
    let nn = real_gaussian(n, 0.5 * scale, &mut r);
    let delta = r.random_range(0.05..0.5);
    let d = nn.mul(&nn.transpose()).add(&Matrix::identity(n).scale_real(delta))?;
    fold_all(dims, [a, b, c, d])
}
