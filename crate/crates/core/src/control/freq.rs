//! Frequency sweeps over `ω ≥ 0`: peak gain and phase profiles.
//!
//! Only `ω ≥ 0` is sampled; real systems satisfy `G(−ıω) = conj G(ıω)`, which
//! mirrors every quantity computed here. Nothing between grid points is
//! certified.

use rayon::prelude::*;
use serde::Serialize;

use super::system::MltiSystem;
use crate::error::{Error, Result};
use crate::numerics;
use crate::phase::{classify_matrix, phases_from_report, ClassifyOptions, SectorialClass};

pub const DEFAULT_POINTS: usize = 400;
pub const DEFAULT_WMIN: f64 = 1e-3;
pub const DEFAULT_WMAX: f64 = 1e3;

/// Classification grid used at each frequency. Coarser than the standalone
/// default; an arc it misses reads as non-sectorial, which only makes a
/// certificate inapplicable, never wrongly passing.
pub const SWEEP_CLASSIFY_GRID: usize = 128;

const GOLDEN_STEPS: usize = 80;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
    includes_infinity: bool,
}

impl FrequencyGrid {
    /// Finite, nonnegative, strictly increasing frequencies.
    pub fn new(omegas: Vec<f64>, includes_infinity: bool) -> Result<Self> {
        if omegas.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain("grid frequencies must be finite and nonnegative"));
        }
        if omegas.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::domain("grid frequencies must be strictly increasing"));
        }
        Ok(Self { omegas, includes_infinity })
    }

    /// `ω = 0`, `points` log-spaced values over `[wmin, wmax]`, and `∞`.
    pub fn log_spaced(wmin: f64, wmax: f64, points: usize) -> Result<Self> {
        if !(wmin > 0.0 && wmax > wmin && wmax.is_finite()) || points < 2 {
            return Err(Error::domain(format!("log grid needs 0 < wmin < wmax and ≥ 2 points, got [{wmin}, {wmax}] with {points}")));
        }
        let (lo, hi) = (wmin.log10(), wmax.log10());
        let mut omegas = vec![0.0];
        omegas.extend((0..points).map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (points - 1) as f64)));
        Self::new(omegas, true)
    }

    pub fn with_points(points: usize) -> Result<Self> {
        Self::log_spaced(DEFAULT_WMIN, DEFAULT_WMAX, points)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn includes_infinity(&self) -> bool {
        self.includes_infinity
    }

    /// Finite frequencies followed by `+∞` when included.
    pub fn points(&self) -> Vec<f64> {
        let mut p = self.omegas.clone();
        if self.includes_infinity {
            p.push(f64::INFINITY);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.omegas.len() + usize::from(self.includes_infinity)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::with_points(DEFAULT_POINTS).expect("default grid is valid")
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HinfNorm {
    pub value: f64,
    /// Frequency achieving the value; `+∞` serializes as `null`.
    pub omega: f64,
}

fn sigma_max(sys: &MltiSystem, omega: f64) -> Result<f64> {
    Ok(numerics::svd_extremes(sys.response(omega)?.unfold())?.0)
}

/// `sup_ω σ_max(G(ıω))`: the grid maximum (with `∞`), refined by golden
/// section between the neighbours of the best finite grid point.
pub fn hinf_norm(sys: &MltiSystem, grid: &FrequencyGrid) -> Result<HinfNorm> {
    sys.require_stable("system")?;
    let points = grid.points();
    let values = points.par_iter().map(|&w| sigma_max(sys, w)).collect::<Result<Vec<_>>>()?;
    let mut best = HinfNorm { value: f64::NEG_INFINITY, omega: 0.0 };
    let mut best_finite = None;
    for (i, (&w, &v)) in points.iter().zip(&values).enumerate() {
        if v > best.value {
            best = HinfNorm { value: v, omega: w };
        }
        if w.is_finite() && best_finite.is_none_or(|j: usize| v > values[j]) {
            best_finite = Some(i);
        }
    }
    if let Some(i) = best_finite {
        let omegas = grid.omegas();
        let lo = if i > 0 { omegas[i - 1] } else { omegas[i] };
        let hi = if i + 1 < omegas.len() { omegas[i + 1] } else { omegas[i] };
        if hi > lo {
            let refined = golden_max(|w| sigma_max(sys, w), lo, hi)?;
            if refined.value > best.value {
                best = refined;
            }
        }
    }
    if best.value == f64::NEG_INFINITY {
        return Err(Error::domain("empty frequency grid"));
    }
    Ok(best)
}

/// Golden-section search for a maximum on `[lo, hi]`, in `log ω` when
/// `lo > 0`.
fn golden_max(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<HinfNorm> {
    let logarithmic = lo > 0.0;
    let to = |x: f64| if logarithmic { x.ln() } else { x };
    let from = |x: f64| if logarithmic { x.exp() } else { x };
    let g = |x: f64| f(from(x));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (to(lo), to(hi));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..GOLDEN_STEPS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d)?;
        }
    }
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(HinfNorm { value: v, omega: from(x) })
}

/// Phase extremes of `G(ıω)` at one frequency. Non-sectorial points carry
/// `NaN` extremes, serialized as `null`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhasePoint {
    pub omega: f64,
    pub class: SectorialClass,
    pub sectorial: bool,
    pub phimax: f64,
    pub phimin: f64,
}

pub(crate) fn sweep_options() -> ClassifyOptions {
    ClassifyOptions { grid: SWEEP_CLASSIFY_GRID, ..ClassifyOptions::default() }
}

/// Classification and phase extremes at every grid point, including `∞`
/// (on `D`). Phases are unwrapped along the grid: each point's phases are
/// shifted by a multiple of 2π to bring their center nearest the previous
/// sectorial point's, starting from the principal branch at the lowest
/// frequency.
pub fn freq_phase_profile(sys: &MltiSystem, grid: &FrequencyGrid) -> Result<Vec<PhasePoint>> {
    sys.require_stable("system")?;
    let opts = sweep_options();
    let raw = grid
        .points()
        .par_iter()
        .map(|&w| -> Result<PhasePoint> {
            let g = sys.response(w)?;
            let report = classify_matrix(g.unfold(), opts)?;
            let (phimax, phimin) = if report.is_sectorial() {
                let p = phases_from_report(g.unfold(), &report)?;
                (p.max(), p.min())
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok(PhasePoint { omega: w, class: report.class, sectorial: report.is_sectorial(), phimax, phimin })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(unwrap_profile(raw))
}

fn unwrap_profile(mut points: Vec<PhasePoint>) -> Vec<PhasePoint> {
    let mut center: Option<f64> = None;
    for p in points.iter_mut().filter(|p| p.sectorial) {
        if let Some(c) = center {
            let shift = std::f64::consts::TAU * ((c - 0.5 * (p.phimax + p.phimin)) / std::f64::consts::TAU).round();
            p.phimax += shift;
            p.phimin += shift;
        }
        center = Some(0.5 * (p.phimax + p.phimin));
    }
    points
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::control::system::random_stable_system;
    use crate::numerics::C64;
    use crate::phase::phases;
    use crate::tensor::random::random_sectorial;
    use crate::tensor::DenseTensor;

    #[test]
    fn default_grid_shape() {
        let g = FrequencyGrid::default();
        assert_eq!(g.omegas().len(), 401);
        assert_eq!(g.omegas()[0], 0.0);
        assert!((g.omegas()[400] - 1e3).abs() < 1e-9);
        assert!(g.includes_infinity());
        assert!(FrequencyGrid::new(vec![1.0, 1.0], false).is_err());
    }

    #[test]
    fn first_order_norm_and_phase() {
        let g = MltiSystem::first_order(&[2, 2], 1.0, 1.0).unwrap();
        let n = hinf_norm(&g, &FrequencyGrid::default()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-12 && n.omega == 0.0);
        let prof = freq_phase_profile(&g, &FrequencyGrid::with_points(50).unwrap()).unwrap();
        for p in &prof[..prof.len() - 1] {
            assert!((p.phimax + p.omega.atan()).abs() < 1e-9 && (p.phimin - p.phimax).abs() < 1e-9);
        }
        // G(∞) = 0 is not sectorial
        assert!(!prof.last().unwrap().sectorial);
    }

    #[test]
    fn static_profiles() {
        let dims = [2, 2];
        let j = MltiSystem::static_gain(DenseTensor::identity(&dims).unwrap().scalar_mul(C64::i())).unwrap();
        for p in freq_phase_profile(&j, &FrequencyGrid::with_points(10).unwrap()).unwrap() {
            assert!((p.phimax - FRAC_PI_2).abs() < 1e-9 && (p.phimin - FRAC_PI_2).abs() < 1e-9);
        }
        let d = random_sectorial(&dims, (-0.8, 1.1), 3).unwrap().tensor;
        let want = phases(&d).unwrap();
        let s = MltiSystem::static_gain(d.clone()).unwrap();
        for p in freq_phase_profile(&s, &FrequencyGrid::with_points(10).unwrap()).unwrap() {
            assert!((p.phimax - want.max()).abs() < 1e-9 && (p.phimin - want.min()).abs() < 1e-9);
        }
        let n = hinf_norm(&s, &FrequencyGrid::with_points(10).unwrap()).unwrap();
        assert!((n.value - numerics::svd_extremes(d.unfold()).unwrap().0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_norm_converges() {
        for seed in 0..4 {
            let g = random_stable_system(&[2, 2], seed).unwrap();
            let coarse = hinf_norm(&g, &FrequencyGrid::with_points(512).unwrap()).unwrap();
            let fine = hinf_norm(&g, &FrequencyGrid::with_points(8192).unwrap()).unwrap();
            assert!((coarse.value - fine.value).abs() <= 1e-4, "seed {seed}");
        }
    }

    #[test]
    fn unstable_rejected() {
        let g = MltiSystem::first_order(&[1], 1.0, -1.0).unwrap();
        assert!(matches!(hinf_norm(&g, &FrequencyGrid::default()), Err(Error::Domain(_))));
    }
}
