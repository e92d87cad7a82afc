//! Feedback stability of the loop `e₁ = w₁ − G e₂`, `e₂ = w₂ + H e₁`:
//! small phase and small gain certificates, the Gang of Four realization
//! and a closed-loop eigenvalue oracle.
//!
//! The loop is negative feedback, so the return difference is `I + H*G`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::blocks::block_2x2;
use super::freq::{freq_phase_profile, hinf_norm, sweep_options, FrequencyGrid, HinfNorm, PhasePoint};
use super::system::MltiSystem;
use crate::analysis::quasi_phases;
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::numerics::{self, Matrix, C64};
use crate::phase::{classify_matrix, phases_from_report, SectorialClass};
use crate::tensor::DenseTensor;

/// Strictness margin for the phase and gain inequalities.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Largest closed-loop pole real part the oracle accepts as stable.
pub const ORACLE_MARGIN: f64 = -1e-9;
/// `σ_min / max(1, σ_max)` of `I + D_H*D_G` below which the loop is ill-posed.
const WELL_POSED_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopVerdict {
    Stable,
    Unstable,
    IllPosed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    Phase,
    Gain,
    Both,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrequencyRecord {
    pub omega: f64,
    pub phimax_g: f64,
    pub phimin_g: f64,
    pub phimax_h: f64,
    pub phimin_h: f64,
    /// `π − Φ̄_G − Φ̄_H`.
    pub margin_hi: f64,
    /// `Φ̲_G + Φ̲_H + π`.
    pub margin_lo: f64,
    pub sectorial_g: bool,
    pub sectorial_h: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallGain {
    pub hinf_g: HinfNorm,
    pub hinf_h: HinfNorm,
    pub product: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    /// Per-frequency phase data; empty when only the gain test ran.
    pub records: Vec<FrequencyRecord>,
    pub small_phase: Option<Verdict>,
    pub small_gain: Option<SmallGain>,
    pub oracle: LoopVerdict,
    /// Number of frequencies examined, `∞` included.
    pub grid_points: usize,
    pub note: &'static str,
}

const NOTE: &str = "a pass is sufficient for closed-loop stability, never necessary; \
phases are checked on the frequency grid only";

impl StabilityReport {
    pub const CSV_HEADER: &'static str = "omega,phimax_g,phimin_g,phimax_h,phimin_h,margin_hi,margin_lo,sectorial_g,sectorial_h";

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            let nums = [r.omega, r.phimax_g, r.phimin_g, r.phimax_h, r.phimin_h, r.margin_hi, r.margin_lo];
            let cells: Vec<String> = nums.iter().map(|&x| csv_number(x)).collect();
            writeln!(w, "{},{},{}", cells.join(","), r.sectorial_g, r.sectorial_h)?;
        }
        Ok(())
    }
}

fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        g17(x)
    }
}

fn is_zero(t: &DenseTensor) -> bool {
    t.data().iter().all(|z| *z == C64::new(0.0, 0.0))
}

/// Grid for a loop sweep. `G(∞)H(∞) = 0` when either feedthrough vanishes,
/// and a zero value has no phases, so `∞` is then left out.
fn loop_grid(g: &MltiSystem, h: &MltiSystem, grid: &FrequencyGrid) -> Result<FrequencyGrid> {
    let keep_inf = grid.includes_infinity() && !is_zero(g.d()) && !is_zero(h.d());
    FrequencyGrid::new(grid.omegas().to_vec(), keep_inf)
}

fn check_pair(g: &MltiSystem, h: &MltiSystem) -> Result<()> {
    if g.shape() != h.shape() {
        return Err(Error::shape(format!("G is {} but H is {}", g.shape(), h.shape())));
    }
    g.require_stable("G")?;
    h.require_stable("H")
}

fn phase_records(g: &MltiSystem, h: &MltiSystem, grid: &FrequencyGrid) -> Result<(Vec<FrequencyRecord>, Verdict)> {
    let grid = loop_grid(g, h, grid)?;
    let pg = freq_phase_profile(g, &grid)?;
    let ph = freq_phase_profile(h, &grid)?;
    let records: Vec<FrequencyRecord> = pg
        .iter()
        .zip(&ph)
        .map(|(a, b): (&PhasePoint, &PhasePoint)| FrequencyRecord {
            omega: a.omega,
            phimax_g: a.phimax,
            phimin_g: a.phimin,
            phimax_h: b.phimax,
            phimin_h: b.phimin,
            margin_hi: PI - a.phimax - b.phimax,
            margin_lo: a.phimin + b.phimin + PI,
            sectorial_g: a.sectorial,
            sectorial_h: b.sectorial,
        })
        .collect();
    let verdict = if records.iter().any(|r| !r.sectorial_g || !r.sectorial_h) {
        Verdict::Inapplicable
    } else if records.iter().all(|r| r.margin_hi > CERTIFICATE_TOL && r.margin_lo > CERTIFICATE_TOL) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok((records, verdict))
}

/// Small phase test: pass iff `G` and `H` are sectorial at every grid point
/// and `Φ̄_G + Φ̄_H < π`, `Φ̲_G + Φ̲_H > −π` hold with margin.
pub fn small_phase_check(g: &MltiSystem, h: &MltiSystem, grid: &FrequencyGrid) -> Result<StabilityReport> {
    stability_report(g, h, grid, Criterion::Phase)
}

/// Small gain test: pass iff `‖G‖∞ ‖H‖∞ < 1`.
pub fn small_gain_check(g: &MltiSystem, h: &MltiSystem, grid: &FrequencyGrid) -> Result<SmallGain> {
    check_pair(g, h)?;
    let hinf_g = hinf_norm(g, grid)?;
    let hinf_h = hinf_norm(h, grid)?;
    let product = hinf_g.value * hinf_h.value;
    let verdict = if product < 1.0 - CERTIFICATE_TOL { Verdict::Pass } else { Verdict::Fail };
    Ok(SmallGain { hinf_g, hinf_h, product, verdict })
}

/// Runs the selected certificates and the oracle on one pair.
pub fn stability_report(g: &MltiSystem, h: &MltiSystem, grid: &FrequencyGrid, criterion: Criterion) -> Result<StabilityReport> {
    check_pair(g, h)?;
    let (records, small_phase) = if criterion == Criterion::Gain {
        (Vec::new(), None)
    } else {
        let (r, v) = phase_records(g, h, grid)?;
        (r, Some(v))
    };
    let small_gain = if criterion == Criterion::Phase { None } else { Some(small_gain_check(g, h, grid)?) };
    Ok(StabilityReport {
        records,
        small_phase,
        small_gain,
        oracle: closed_loop_oracle(g, h)?,
        grid_points: grid.len(),
        note: NOTE,
    })
}

/// Closed-loop realization in block coordinates `[G-part; H-part]`:
/// `e = (I − F)⁻¹ (w + blkdiag(−C_G, C_H) x)` with
/// `I − F = [I, D_G; −D_H, I]`.
fn loop_matrices(g: &MltiSystem, h: &MltiSystem) -> Result<Option<[Matrix; 4]>> {
    if g.shape() != h.shape() {
        return Err(Error::shape(format!("G is {} but H is {}", g.shape(), h.shape())));
    }
    let n = g.shape().rows();
    let (dg, dh) = (g.d().unfold(), h.d().unfold());
    let ret = Matrix::identity(n).add(&dh.mul(dg))?;
    let (smax, smin) = numerics::svd_extremes(&ret)?;
    if smin <= WELL_POSED_TOL * smax.max(1.0) {
        return Ok(None);
    }
    let stack = |blocks: [&Matrix; 4]| {
        Matrix::from_fn(2 * n, 2 * n, |r, c| blocks[2 * (r / n) + c / n][(r % n, c % n)])
    };
    let zero = Matrix::zeros(n, n);
    let eye = Matrix::identity(n);
    let i_minus_f = stack([&eye, dg, &dh.scale_real(-1.0), &eye]);
    let out = stack([&g.c().unfold().scale_real(-1.0), &zero, &zero, h.c().unfold()]);
    let de = numerics::solve(&i_minus_f, &Matrix::identity(2 * n))
        .map_err(|_| Error::IllPosed("I − F is singular".into()))?;
    let ce = de.mul(&out);
    let bsel = stack([&zero, g.b().unfold(), h.b().unfold(), &zero]);
    let a = stack([g.a().unfold(), &zero, &zero, h.a().unfold()]).add(&bsel.mul(&ce))?;
    let b = bsel.mul(&de);
    Ok(Some([a, b, ce, de]))
}

fn fold_blocks(m: &Matrix, dims: &[usize]) -> Result<DenseTensor> {
    let n = m.rows() / 2;
    let idx = |k: usize| (k * n..(k + 1) * n).collect::<Vec<_>>();
    let part = |r, c| DenseTensor::fold_square(m.select(&idx(r), &idx(c)), dims);
    block_2x2(&part(0, 0)?, &part(0, 1)?, &part(1, 0)?, &part(1, 1)?, 1)
}

/// State-space realization of the map `(w₁, w₂) ↦ (e₁, e₂)`, whose transfer
/// is `[I − G(I+HG)⁻¹H, −G(I+HG)⁻¹; (I+HG)⁻¹H, (I+HG)⁻¹]` blocked along
/// mode 1.
pub fn gang_of_four(g: &MltiSystem, h: &MltiSystem) -> Result<MltiSystem> {
    let Some(m) = loop_matrices(g, h)? else {
        return Err(Error::IllPosed("I + D_H*D_G is singular".into()));
    };
    let dims = g.dims();
    let [a, b, c, d] = m.each_ref().map(|x| fold_blocks(x, dims));
    MltiSystem::new(a?, b?, c?, d?)
}

/// Ground truth for the loop: ill-posed when `I + D_H*D_G` is singular,
/// otherwise stable iff every closed-loop pole has real part below
/// [`ORACLE_MARGIN`].
pub fn closed_loop_oracle(g: &MltiSystem, h: &MltiSystem) -> Result<LoopVerdict> {
    let Some([a, ..]) = loop_matrices(g, h)? else {
        return Ok(LoopVerdict::IllPosed);
    };
    let poles = numerics::general_eig(&a, false)?.values;
    Ok(if poles.iter().all(|z| z.re < ORACLE_MARGIN) { LoopVerdict::Stable } else { LoopVerdict::Unstable })
}

/// Scalar rational weight `h(s) = num(s)/den(s)`, coefficients in descending
/// powers of `s`, with `h` and `1/h` both stable and proper.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarWeight {
    num: Vec<f64>,
    den: Vec<f64>,
}

fn trim_leading(c: &[f64]) -> Vec<f64> {
    c.iter().copied().skip_while(|&x| x == 0.0).collect()
}

/// Roots of a polynomial (descending coefficients, nonzero leader) from
/// its companion matrix.
pub fn polynomial_roots(c: &[f64]) -> Result<Vec<C64>> {
    let c = trim_leading(c);
    if c.is_empty() {
        return Err(Error::domain("zero polynomial"));
    }
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let comp = Matrix::from_fn(d, d, |r, k| {
        if r == 0 {
            C64::new(-c[k + 1] / c[0], 0.0)
        } else if k + 1 == r {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(numerics::general_eig(&comp, false)?.values)
}

fn polyval(c: &[f64], s: C64) -> C64 {
    c.iter().fold(C64::new(0.0, 0.0), |acc, &x| acc * s + x)
}

impl ScalarWeight {
    pub fn new(num: &[f64], den: &[f64]) -> Result<Self> {
        let (num, den) = (trim_leading(num), trim_leading(den));
        if num.is_empty() || den.is_empty() {
            return Err(Error::domain("h needs a nonzero numerator and denominator"));
        }
        if num.len() != den.len() {
            return Err(Error::domain("h and 1/h are both proper only when numerator and denominator degrees agree"));
        }
        for (what, c) in [("zero", &num), ("pole", &den)] {
            if let Some(z) = polynomial_roots(c)?.iter().find(|z| z.re >= super::system::STABILITY_MARGIN) {
                return Err(Error::domain(format!("h has a {what} at {z}, outside the open left half-plane")));
            }
        }
        Ok(Self { num, den })
    }

    pub fn constant(k: f64) -> Result<Self> {
        Self::new(&[k], &[1.0])
    }

    /// `h(ıω)`, with `ω = +∞` giving the ratio of leading coefficients.
    pub fn response(&self, omega: f64) -> C64 {
        if omega == f64::INFINITY {
            return C64::new(self.num[0] / self.den[0], 0.0);
        }
        let s = C64::new(0.0, omega);
        polyval(&self.num, s) / polyval(&self.den, s)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeRecord {
    pub omega: f64,
    pub class: SectorialClass,
    pub phimax: f64,
    pub phimin: f64,
    /// Unwrapped `∠h(ıω)`.
    pub angle_h: f64,
    /// `π/2 − ∠h − Φ̄`.
    pub margin_hi: f64,
    /// `Φ̲ + π/2 + ∠h`.
    pub margin_lo: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub check: &'static str,
    pub verdict: Verdict,
    pub records: Vec<ConeRecord>,
    pub note: &'static str,
}

/// Whether `G` stays stable in feedback with every `H` in the cone
/// `{H : ∠h − π/2 ≤ Φ(H(ıω)) ≤ ∠h + π/2}`, via the sufficient test that `G`
/// is quasi-sectorial on the grid with `Φ̄(G) ≤ π/2 − ∠h` and
/// `Φ̲(G) ≥ −π/2 − ∠h`. The `∞` point is skipped when `D_G = O`.
pub fn cone_condition_check(g: &MltiSystem, h: &ScalarWeight, grid: &FrequencyGrid) -> Result<ConeReport> {
    g.require_stable("G")?;
    let grid = FrequencyGrid::new(grid.omegas().to_vec(), grid.includes_infinity() && !is_zero(g.d()))?;
    let opts = sweep_options();
    let raw = grid
        .points()
        .par_iter()
        .map(|&w| -> Result<(f64, SectorialClass, f64, f64)> {
            let t = g.response(w)?;
            let report = classify_matrix(t.unfold(), opts)?;
            let class = report.class;
            let p = match class {
                SectorialClass::Sectorial => Some(phases_from_report(t.unfold(), &report)?),
                SectorialClass::QuasiSectorial => quasi_phases(&t).ok(),
                _ => None,
            };
            let (hi, lo) = p.map_or((f64::NAN, f64::NAN), |p| (p.max(), p.min()));
            Ok((w, class, hi, lo))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(raw.len());
    let (mut center, mut prev_h): (Option<f64>, Option<f64>) = (None, None);
    for (omega, class, mut phimax, mut phimin) in raw {
        let mut angle_h = h.response(omega).arg();
        if let Some(p) = prev_h {
            angle_h += TAU * ((p - angle_h) / TAU).round();
        }
        prev_h = Some(angle_h);
        if !phimax.is_nan() {
            if let Some(c) = center {
                let shift = TAU * ((c - 0.5 * (phimax + phimin)) / TAU).round();
                phimax += shift;
                phimin += shift;
            }
            center = Some(0.5 * (phimax + phimin));
        }
        records.push(ConeRecord {
            omega,
            class,
            phimax,
            phimin,
            angle_h,
            margin_hi: FRAC_PI_2 - angle_h - phimax,
            margin_lo: phimin + FRAC_PI_2 + angle_h,
        });
    }
    let verdict = if records.iter().any(|r| r.phimax.is_nan()) {
        Verdict::Inapplicable
    } else if records.iter().all(|r| r.margin_hi >= -CERTIFICATE_TOL && r.margin_lo >= -CERTIFICATE_TOL) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConeReport {
        check: "cone_condition",
        verdict,
        records,
        note: "sufficient condition on the frequency grid only",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::system::{random_passive_system, random_stable_system};

    fn scaled_identity(dims: &[usize], z: C64) -> MltiSystem {
        MltiSystem::static_gain(DenseTensor::identity(dims).unwrap().scalar_mul(z)).unwrap()
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::with_points(60).unwrap()
    }

    #[test]
    fn first_order_pair_passes_phase_fails_gain() {
        let g = MltiSystem::first_order(&[2, 2], 1.0, 1.0).unwrap();
        let r = stability_report(&g, &g, &grid(), Criterion::Both).unwrap();
        assert_eq!(r.small_phase, Some(Verdict::Pass));
        assert_eq!(r.small_gain.unwrap().verdict, Verdict::Fail);
        assert_eq!(r.oracle, LoopVerdict::Stable);
    }

    #[test]
    fn static_pairs() {
        let dims = [2];
        let j = scaled_identity(&dims, C64::i());
        assert_eq!(small_phase_check(&j, &j, &grid()).unwrap().small_phase, Some(Verdict::Fail));
        let e = scaled_identity(&dims, C64::from_polar(1.0, 1.0));
        let r = small_phase_check(&e, &e, &grid()).unwrap();
        assert_eq!(r.small_phase, Some(Verdict::Pass));
        assert_eq!(r.oracle, LoopVerdict::Stable);
        let half = scaled_identity(&dims, C64::new(0.5, 0.0));
        assert_eq!(small_gain_check(&half, &half, &grid()).unwrap().verdict, Verdict::Pass);
        let one = scaled_identity(&dims, C64::new(1.0, 0.0));
        assert_eq!(small_gain_check(&one, &one, &grid()).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn oracle_examples() {
        let g = MltiSystem::first_order(&[1], 2.0, 1.0).unwrap();
        let h = scaled_identity(&[1], C64::new(-1.0, 0.0));
        assert_eq!(closed_loop_oracle(&g, &h).unwrap(), LoopVerdict::Unstable);
        let one = scaled_identity(&[2], C64::new(1.0, 0.0));
        let minus = scaled_identity(&[2], C64::new(-1.0, 0.0));
        assert_eq!(closed_loop_oracle(&one, &minus).unwrap(), LoopVerdict::IllPosed);
        assert!(matches!(gang_of_four(&one, &minus), Err(Error::IllPosed(_))));
    }

    fn formula(g: &MltiSystem, h: &MltiSystem, s: C64) -> DenseTensor {
        let (gs, hs) = (g.transfer_at(s).unwrap(), h.transfer_at(s).unwrap());
        let i = DenseTensor::identity(g.dims()).unwrap();
        let inv = i.add(&hs.einstein_product(&gs).unwrap()).unwrap().inverse().unwrap();
        let g_inv = gs.einstein_product(&inv).unwrap();
        let inv_h = inv.einstein_product(&hs).unwrap();
        let b11 = i.sub(&g_inv.einstein_product(&hs).unwrap()).unwrap();
        block_2x2(&b11, &g_inv.scalar_mul(C64::new(-1.0, 0.0)), &inv_h, &inv, 1).unwrap()
    }

    #[test]
    fn gang_of_four_matches_formula() {
        let g = random_stable_system(&[2, 2], 3).unwrap();
        let h = random_passive_system(&[2, 2], 4).unwrap();
        let loop_sys = gang_of_four(&g, &h).unwrap();
        assert_eq!(loop_sys.dims(), &[4, 2]);
        for k in 0..20 {
            let s = C64::new(0.0, 0.05 * (k as f64 + 1.0).powf(1.7));
            let got = loop_sys.transfer_at(s).unwrap();
            assert!(got.sub(&formula(&g, &h, s)).unwrap().unfold().max_abs() <= 1e-8, "ω = {}", s.im);
        }
    }

    #[test]
    fn open_loop_pattern() {
        let g = random_stable_system(&[2], 5).unwrap();
        let zero = MltiSystem::static_gain(DenseTensor::zeros(g.shape().clone())).unwrap();
        let s = C64::new(0.0, 0.9);
        let got = gang_of_four(&g, &zero).unwrap().transfer_at(s).unwrap();
        let i = DenseTensor::identity(&[2]).unwrap();
        let o = DenseTensor::zeros(i.shape().clone());
        let want = block_2x2(&i, &g.transfer_at(s).unwrap().scalar_mul(C64::new(-1.0, 0.0)), &o, &i, 1).unwrap();
        assert!(got.sub(&want).unwrap().unfold().max_abs() < 1e-12);
    }

    #[test]
    fn cone_examples() {
        let one = ScalarWeight::constant(1.0).unwrap();
        let dims = [2];
        let v = |z: C64| cone_condition_check(&scaled_identity(&dims, z), &one, &grid()).unwrap().verdict;
        assert_eq!(v(C64::new(0.5, 0.0)), Verdict::Pass);
        assert_eq!(v(C64::i()), Verdict::Pass);
        assert_eq!(v(C64::from_polar(1.0, 2.0)), Verdict::Fail);
        assert!(matches!(ScalarWeight::new(&[1.0, -1.0], &[1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(ScalarWeight::new(&[1.0], &[1.0, 1.0]), Err(Error::Domain(_))));
        let lead = ScalarWeight::new(&[1.0, 1.0], &[1.0, 10.0]).unwrap();
        let r = cone_condition_check(&MltiSystem::first_order(&dims, 1.0, 1.0).unwrap(), &lead, &grid()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn csv_layout() {
        let g = MltiSystem::first_order(&[1], 1.0, 1.0).unwrap();
        let r = small_phase_check(&g, &g, &grid()).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(StabilityReport::CSV_HEADER));
        assert_eq!(lines.count(), r.records.len());
    }
}
