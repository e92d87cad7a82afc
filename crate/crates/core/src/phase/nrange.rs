//! Boundary of the numerical range `W(A)` by the support-function method.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;

use super::classify::MinEigFunction;
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::numerics::{self, C64};
use crate::tensor::{DenseTensor, Shape};

pub const MIN_SAMPLES: usize = 16;

#[derive(Clone, Debug)]
pub struct NumericalRangeBoundary {
    pub angles: Vec<f64>,
    pub points: Vec<C64>,
    /// `λ_max(Herm(e^{−ıt} A))` at each angle.
    pub support: Vec<f64>,
    /// Unit tensors `X` with `Xᴴ * A * X` equal to the boundary point.
    pub witnesses: Vec<DenseTensor>,
}

pub fn nr_boundary(a: &DenseTensor, samples: usize) -> Result<NumericalRangeBoundary> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("numerical range needs an even-order square tensor, got {}", a.shape())));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!("at least {MIN_SAMPLES} boundary samples are required")));
    }
    let f = MinEigFunction::new(a.unfold());
    let vshape = Shape::vector(a.row_dims())?;
    let rows: Vec<(f64, C64, f64, DenseTensor)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let t = TAU * k as f64 / samples as f64;
            let e = numerics::hermitian_eig(&f.rotated(t))?;
            let last = e.values.len() - 1;
            let x = e.vectors.column(last);
            let ax = a.unfold().mul_vec(&x);
            let point: C64 = x.iter().zip(&ax).map(|(xi, yi)| xi.conj() * yi).sum();
            Ok((t, point, e.values[last], DenseTensor::new(vshape.clone(), x)?))
        })
        .collect::<Result<_>>()?;
    let mut out = NumericalRangeBoundary { angles: vec![], points: vec![], support: vec![], witnesses: vec![] };
    for (t, p, s, w) in rows {
        out.angles.push(t);
        out.points.push(p);
        out.support.push(s);
        out.witnesses.push(w);
    }
    Ok(out)
}

impl NumericalRangeBoundary {
    /// CSV with header `t,re,im,support`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,re,im,support")?;
        for k in 0..self.angles.len() {
            writeln!(
                w,
                "{},{},{},{}",
                g17(self.angles[k]),
                g17(self.points[k].re),
                g17(self.points[k].im),
                g17(self.support[k])
            )?;
        }
        Ok(())
    }

    /// Whether `z` lies in the polygon cut out by the supporting half-planes
    /// `Re(e^{−ıt} z) ≤ h(t)`, up to `tol`.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.angles
            .iter()
            .zip(&self.support)
            .all(|(&t, &h)| (C64::from_polar(1.0, -t) * z).re <= h + tol)
    }
}
