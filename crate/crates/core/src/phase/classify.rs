//! Sectoriality classification through the support-type function
//! `f(t) = λ_min(Herm(e^{−ıt} A)) = λ_min(cos t · H + sin t · K)`.
//!
//! `f(t) > 0` exactly when `W(A)` lies in the open half-plane facing
//! direction `t`, so the positive set of `f` is the arc of admissible
//! rotations and its complement measures the field angle.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::tensor::DenseTensor;

pub const DEFAULT_GRID: usize = 720;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Cap on root-finding steps per arc endpoint; a bracket halves at least
/// every other step, so this is far past double precision.
const MAX_ROOT_STEPS: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectorialClass {
    Sectorial,
    QuasiSectorial,
    SemiSectorial,
    Indefinite,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub grid: usize,
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorialityReport {
    pub class: SectorialClass,
    pub field_angle: f64,
    /// Rotations `t` with `f(t) > 0`, as an increasing pair that may run
    /// past 2π.
    pub positivity_arc: Option<(f64, f64)>,
    /// Largest value of `f` found (grid maximum refined by golden section).
    pub max_f: f64,
    pub argmax_t: f64,
    /// `‖A‖_F`, the scale the tolerance is relative to.
    pub scale: f64,
    /// Sectorial, but with `max f` inside `(0, tol·‖A‖_F]`.
    pub near_boundary: bool,
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

impl SectorialityReport {
    pub fn is_sectorial(&self) -> bool {
        self.class == SectorialClass::Sectorial
    }

    /// Midpoint of the positivity arc folded into `(−π, π]`.
    pub fn arc_midpoint(&self) -> Option<f64> {
        self.positivity_arc.map(|(lo, hi)| wrap_angle(0.5 * (lo + hi)))
    }
}

/// Folds an angle into `(−π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    let mut r = t.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Evaluator for `f(t)` on a fixed square matrix.
#[derive(Clone, Debug)]
pub struct MinEigFunction {
    h: Matrix,
    k: Matrix,
}

impl MinEigFunction {
    pub fn new(a: &Matrix) -> Self {
        Self { h: a.hermitian_part(), k: a.skew_part() }
    }

    pub fn rotated(&self, t: f64) -> Matrix {
        let (s, c) = t.sin_cos();
        let mut m = self.h.scale_real(c);
        for (x, y) in m.as_mut_slice().iter_mut().zip(self.k.as_slice()) {
            *x += y * s;
        }
        // exact Hermitian symmetry for the eigensolver
        m.hermitian_part()
    }

    pub fn eval(&self, t: f64) -> f64 {
        numerics::lambda_min(&self.rotated(t)).unwrap_or(f64::NAN)
    }

    /// A point where `f` crosses level `c` inside `[lo, hi]`, given that
    /// `f > c` holds at exactly one end (Brent's method).
    fn crossing(&self, lo: f64, hi: f64, c: f64) -> f64 {
        let g = |t: f64| self.eval(t) - c;
        let (mut a, mut b) = (lo, hi);
        let (mut fa, mut fb) = (g(a), g(b));
        let (mut cc, mut fc) = (a, fa);
        let (mut d, mut e) = (b - a, b - a);
        for _ in 0..MAX_ROOT_STEPS {
            if (fb > 0.0) == (fc > 0.0) {
                cc = a;
                fc = fa;
                d = b - a;
                e = d;
            }
            if fc.abs() < fb.abs() {
                (a, b, cc) = (b, cc, b);
                (fa, fb, fc) = (fb, fc, fb);
            }
            let tol = 2.0 * f64::EPSILON * b.abs().max(1.0);
            let xm = 0.5 * (cc - b);
            if xm.abs() <= tol || fb == 0.0 {
                return b;
            }
            if e.abs() >= tol && fa.abs() > fb.abs() {
                let s = fb / fa;
                let (mut p, mut q) = if a == cc {
                    (2.0 * xm * s, 1.0 - s)
                } else {
                    let (q, r) = (fa / fc, fb / fc);
                    (s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)), (q - 1.0) * (r - 1.0) * (s - 1.0))
                };
                if p > 0.0 {
                    q = -q;
                }
                p = p.abs();
                if 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs()) {
                    e = d;
                    d = p / q;
                } else {
                    d = xm;
                    e = d;
                }
            } else {
                d = xm;
                e = d;
            }
            a = b;
            fa = fb;
            b += if d.abs() > tol { d } else { tol.copysign(xm) };
            fb = g(b);
        }
        b
    }

    fn golden_max(&self, mut a: f64, mut b: f64) -> (f64, f64) {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let mut fc = self.eval(c);
        let mut fd = self.eval(d);
        while b - a > 1e-10 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = self.eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = self.eval(d);
            }
        }
        if fc >= fd {
            (c, fc)
        } else {
            (d, fd)
        }
    }

    /// The arc of `{f > c}` containing `t0`, assuming `f(t0) > c` and that
    /// this superlevel set is a single arc shorter than 2π.
    fn arc_around(&self, t0: f64, c: f64) -> (f64, f64) {
        let lo = self.crossing(t0 - PI, t0, c);
        let hi = self.crossing(t0, t0 + PI, c);
        (lo, hi)
    }
}

/// Total length of `{t : f(t) > c}` from grid runs with refined endpoints.
fn superlevel_measure(f: &MinEigFunction, samples: &[(f64, f64)], c: f64) -> f64 {
    let m = samples.len();
    let above: Vec<bool> = samples.iter().map(|&(_, v)| v > c).collect();
    if above.iter().all(|&b| b) {
        return TAU;
    }
    let Some(start) = above.iter().position(|&b| !b) else { return 0.0 };
    let step = TAU / m as f64;
    let mut total = 0.0;
    let mut run_begin: Option<f64> = None;
    for off in 1..=m {
        let k = start + off;
        let t = samples[k % m].0 + TAU * (k / m) as f64;
        let prev_t = t - step;
        match (above[k % m], run_begin) {
            (true, None) => run_begin = Some(f.crossing(prev_t, t, c)),
            (false, Some(b)) => {
                total += f.crossing(prev_t, t, c) - b;
                run_begin = None;
            }
            _ => {}
        }
    }
    total
}

/// Detects `W(A)` lying on a line through the origin with 0 strictly inside
/// it: `H` and `K` are linearly dependent and the component along the line
/// is indefinite.
fn segment_through_origin(f: &MinEigFunction, thr: f64) -> bool {
    let hh = f.h.frobenius_norm().powi(2);
    let kk = f.k.frobenius_norm().powi(2);
    let hk: f64 = f.h.as_slice().iter().zip(f.k.as_slice()).map(|(x, y)| (x.conj() * y).re).sum();
    // smallest eigenvalue of the Gram matrix [[hh, hk], [hk, kk]]
    let mean = 0.5 * (hh + kk);
    let rad = (0.25 * (hh - kk).powi(2) + hk * hk).sqrt();
    let small = mean - rad;
    if small > thr * thr {
        return false;
    }
    // null direction (cos t0, sin t0) of the Gram matrix; the line runs along t0 + π/2
    let (c1, s1) = (small - kk, hk);
    let (c2, s2) = (hk, small - hh);
    let t0 = if c1.hypot(s1) >= c2.hypot(s2) { s1.atan2(c1) } else { s2.atan2(c2) };
    let t1 = t0 + 0.5 * PI;
    f.eval(t1) < -thr && f.eval(t1 + PI) < -thr
}

pub fn classify_matrix(a: &Matrix, opts: ClassifyOptions) -> Result<SectorialityReport> {
    if !a.is_square() {
        return Err(Error::shape("classification needs a square unfolding"));
    }
    let grid = opts.grid.max(8);
    let scale = a.frobenius_norm();
    let thr = opts.tol * scale;
    let f = MinEigFunction::new(a);
    let samples: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let t = TAU * k as f64 / grid as f64;
            (t, f.eval(t))
        })
        .collect();
    if samples.iter().any(|(_, v)| v.is_nan()) {
        return Err(Error::numeric("eigensolver failed while sampling f(t)"));
    }

    let (kmax, _) = samples
        .iter()
        .enumerate()
        .max_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .expect("grid is nonempty");
    let step = TAU / grid as f64;
    let t_grid = samples[kmax].0;
    let (argmax_t, max_f) = {
        let (t, v) = f.golden_max(t_grid - step, t_grid + step);
        if v >= samples[kmax].1 {
            (t, v)
        } else {
            samples[kmax]
        }
    };

    if scale > 0.0 && max_f > thr {
        let arc = f.arc_around(argmax_t, 0.0);
        let (lo, hi) = f.arc_around(argmax_t, -thr);
        return Ok(SectorialityReport {
            class: SectorialClass::Sectorial,
            field_angle: (PI - (hi - lo)).max(0.0),
            positivity_arc: Some(arc),
            max_f,
            argmax_t: wrap_angle(argmax_t),
            scale,
            // max f in (0, tol·‖A‖] cannot be told apart from rounding on a
            // singular input, so the warning band sits just above the threshold
            near_boundary: max_f <= opts.tol.sqrt() * scale,
            samples,
        });
    }

    let measure = superlevel_measure(&f, &samples, -thr);
    let field_angle = (PI - measure).clamp(0.0, PI);
    let class = if scale > 0.0 && segment_through_origin(&f, thr) {
        SectorialClass::Indefinite
    } else if field_angle < PI - opts.tol.sqrt() && max_f >= -thr {
        // {f > −thr} has measure O(thr) even when δ = π, hence the √tol margin
        SectorialClass::QuasiSectorial
    } else if max_f >= -thr {
        SectorialClass::SemiSectorial
    } else {
        SectorialClass::Indefinite
    };
    Ok(SectorialityReport {
        class,
        field_angle: if class == SectorialClass::Indefinite { PI } else { field_angle },
        positivity_arc: None,
        max_f,
        argmax_t: wrap_angle(argmax_t),
        scale,
        near_boundary: false,
        samples,
    })
}

pub fn classify(a: &DenseTensor, opts: ClassifyOptions) -> Result<SectorialityReport> {
    if !a.is_even_square() {
        return Err(Error::shape(format!("classification needs an even-order square tensor, got {}", a.shape())));
    }
    classify_matrix(a.unfold(), opts)
}

/// Field angle `δ(A)`; undefined when 0 is interior to `W(A)`.
pub fn field_angle(a: &DenseTensor, opts: ClassifyOptions) -> Result<f64> {
    let r = classify(a, opts)?;
    if r.class == SectorialClass::Indefinite {
        return Err(Error::domain("0 lies in the interior of the numerical range"));
    }
    Ok(r.field_angle)
}
