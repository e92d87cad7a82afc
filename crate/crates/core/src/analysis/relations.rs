//! Phases of products and sums: eigenvalue-angle majorization and closure of
//! phase cones under addition.

use std::f64::consts::PI;

use serde::Serialize;

use super::CHECK_TOL;
use crate::error::{Error, Result};
use crate::phase::{phases, wrap_angle, PhaseVector};
use crate::tensor::DenseTensor;

/// Distance from the edge of the angle window that counts as on the edge.
const WINDOW_EDGE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct MajorizationReport {
    pub check: &'static str,
    pub ok: bool,
    /// False when some eigenvalue angle of `A*B` sits on the edge of the
    /// window `(γ_A+γ_B−π, γ_A+γ_B+π)`; the other fields are then empty.
    pub precondition_met: bool,
    /// `Σ_{i≤k} y_i − Σ_{i≤k} x_i` for `k = 1..|I|`.
    pub margins: Vec<f64>,
    /// Sorted unwrapped eigenvalue angles of `A*B`.
    pub angles: Vec<f64>,
    /// `Φ(A) + Φ(B)`.
    pub phase_sums: Vec<f64>,
}

/// Checks `∠λ(A*B) ≺ Φ(A) + Φ(B)`.
pub fn majorization_check(a: &DenseTensor, b: &DenseTensor) -> Result<MajorizationReport> {
    let pa = phases(a)?;
    let pb = phases(b)?;
    if pa.len() != pb.len() {
        return Err(Error::shape("operands have different sizes"));
    }
    let center = pa.gamma + pb.gamma;
    let eig = a.einstein_product(b)?.eigenvalues(false)?.values;
    let mut x = Vec::with_capacity(eig.len());
    for z in &eig {
        if z.norm() == 0.0 {
            return Err(Error::numeric("A*B has a zero eigenvalue"));
        }
        let offset = wrap_angle(z.arg() - center);
        if PI - offset.abs() <= WINDOW_EDGE {
            return Ok(MajorizationReport {
                check: "majorization",
                ok: false,
                precondition_met: false,
                margins: vec![],
                angles: vec![],
                phase_sums: vec![],
            });
        }
        x.push(center + offset);
    }
    x.sort_by(|p, q| q.total_cmp(p));
    let y: Vec<f64> = pa.phases.iter().zip(&pb.phases).map(|(p, q)| p + q).collect();
    let (mut sx, mut sy) = (0.0, 0.0);
    let margins: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| {
            sx += xi;
            sy += yi;
            sy - sx
        })
        .collect();
    let last = margins.len() - 1;
    let ok = margins[..last].iter().all(|&m| m >= -CHECK_TOL) && margins[last].abs() <= CHECK_TOL;
    Ok(MajorizationReport { check: "majorization", ok, precondition_met: true, margins, angles: x, phase_sums: y })
}

/// A phase cone: `C[α, β]` (sectorial with all phases in `[α, β]`) or
/// `C_k[α]` (sectorial with the top `k` phases summing to at most `α` and the
/// bottom `k` to at least `−α`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ConeSpec {
    Interval { alpha: f64, beta: f64 },
    Compound { k: usize, alpha: f64 },
}

impl ConeSpec {
    pub fn interval(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha <= beta && beta - alpha < PI) {
            return Err(Error::domain(format!("cone [{alpha}, {beta}] needs α ≤ β and β − α < π")));
        }
        Ok(Self::Interval { alpha, beta })
    }

    pub fn compound(k: usize, alpha: f64) -> Result<Self> {
        if k == 0 || !(0.0..PI).contains(&alpha) {
            return Err(Error::domain(format!("cone C_{k}[{alpha}] needs k ≥ 1 and α ∈ [0, π)")));
        }
        Ok(Self::Compound { k, alpha })
    }

    /// Angle the cone is centered on, used to pick the phase branch.
    pub fn center(&self) -> f64 {
        match *self {
            Self::Interval { alpha, beta } => 0.5 * (alpha + beta),
            Self::Compound { .. } => 0.0,
        }
    }

    /// Membership of a tensor with the given phases, up to `tol`.
    pub fn contains(&self, p: &PhaseVector, tol: f64) -> bool {
        let p = p.aligned_to(self.center());
        match *self {
            Self::Interval { alpha, beta } => p.min() >= alpha - tol && p.max() <= beta + tol,
            Self::Compound { k, alpha } => {
                if k > p.len() {
                    return false;
                }
                let top: f64 = p.phases[..k].iter().sum();
                let bottom: f64 = p.phases[p.len() - k..].iter().sum();
                top <= alpha + tol && bottom >= -alpha - tol
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeClosureReport {
    pub check: &'static str,
    pub ok: bool,
    /// `max(Φ̄_A, Φ̄_B) − Φ̄(A+B)` and `Φ̲(A+B) − min(Φ̲_A, Φ̲_B)`.
    pub margins: Vec<f64>,
    pub sum_phases: Vec<f64>,
    pub in_cone: bool,
}

/// Checks that `A + B` stays in an interval cone holding `A` and `B`, with
/// the sharper bounds `Φ̄(A+B) ≤ max Φ̄` and `Φ̲(A+B) ≥ min Φ̲`.
pub fn cone_closure_check(a: &DenseTensor, b: &DenseTensor, cone: ConeSpec) -> Result<ConeClosureReport> {
    let ConeSpec::Interval { .. } = cone else {
        return Err(Error::domain("cone closure is checked for interval cones C[α, β]"));
    };
    let center = cone.center();
    let pa = phases(a)?.aligned_to(center);
    let pb = phases(b)?.aligned_to(center);
    if !cone.contains(&pa, CHECK_TOL) || !cone.contains(&pb, CHECK_TOL) {
        return Err(Error::Precondition("both operands must lie in the cone".into()));
    }
    let sum = a.add(b)?;
    let ps = phases(&sum).map_err(|e| Error::numeric(format!("sum of cone members not sectorial: {e}")))?.aligned_to(center);
    let margins = vec![pa.max().max(pb.max()) - ps.max(), ps.min() - pa.min().min(pb.min())];
    Ok(ConeClosureReport {
        check: "cone_closure",
        ok: margins.iter().all(|&m| m >= -CHECK_TOL),
        margins,
        in_cone: cone.contains(&ps, CHECK_TOL),
        sum_phases: ps.phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::C64;
    use crate::tensor::random::random_sectorial;

    #[test]
    fn commuting_diagonals_are_tight() {
        let d = |t: &[f64]| DenseTensor::diagonal(&[3], &t.iter().map(|&x| C64::from_polar(1.0, x)).collect::<Vec<_>>()).unwrap();
        let r = majorization_check(&d(&[0.5, 0.1, -0.2]), &d(&[0.4, 0.0, -0.6])).unwrap();
        assert!(r.ok && r.precondition_met);
        assert!(r.margins.iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn random_majorization() {
        for seed in 0..20 {
            let a = random_sectorial(&[2, 2], (-0.7, 0.7), seed).unwrap().tensor;
            let b = random_sectorial(&[2, 2], (-0.7, 0.7), seed + 500).unwrap().tensor;
            let r = majorization_check(&a, &b).unwrap();
            assert!(r.ok, "seed {seed}: {:?}", r.margins);
        }
        let a = random_sectorial(&[4], (-1.0, 1.0), 9).unwrap().tensor;
        assert!(majorization_check(&a, &DenseTensor::identity(&[4]).unwrap()).unwrap().ok);
    }

    #[test]
    fn cone_closure() {
        let cone = ConeSpec::interval(-0.6, 0.9).unwrap();
        for seed in 0..20 {
            let a = random_sectorial(&[2, 2], (-0.6, 0.9), seed).unwrap().tensor;
            let b = random_sectorial(&[2, 2], (-0.6, 0.9), seed + 77).unwrap().tensor;
            let r = cone_closure_check(&a, &b, cone).unwrap();
            assert!(r.ok && r.in_cone, "{:?}", r.margins);
        }
        let outside = DenseTensor::identity(&[2]).unwrap().scalar_mul(C64::from_polar(1.0, 1.2));
        let inside = DenseTensor::identity(&[2]).unwrap();
        assert!(matches!(cone_closure_check(&outside, &inside, cone), Err(Error::Precondition(_))));
        assert!(ConeSpec::interval(0.0, PI).is_err());
    }
}
