//! The `tphase` command line. Every command prints one JSON document on
//! stdout; human-readable notes go to stderr.
//!
//! Exit codes: 0 success or certificate pass, 1 certificate fail, 2
//! inapplicable (input outside a command's hypotheses), 64 usage, 65 bad
//! input data, 70 numerical failure.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    check_interlacing, compress, compound_spectrum, cone_closure_check, majorization_check, quasi_blocked_decomposition,
    quasi_phases, rank_drop, rank_robustness_threshold, worst_case_b, ConeSpec, RANK_DROP_TOL,
};
use crate::control::{
    cone_condition_check, hinf_norm, random_passive_system, random_stable_system, stability_report, Criterion,
    FrequencyGrid, MltiSystem, ScalarWeight, SystemJson, Verdict, DEFAULT_POINTS, DEFAULT_WMAX, DEFAULT_WMIN,
};
use crate::error::Error;
use crate::fixtures::{example1, example2};
use crate::fmt::to_json;
use crate::numerics::C64;
use crate::phase::{classify, nr_boundary, phases, sectorial_decomposition, ClassifyOptions, PhaseVector, DEFAULT_GRID, DEFAULT_TOL};
use crate::tensor::random::{random_sectorial, rng};
use crate::tensor::{read_tensor, write_tensor, DenseTensor, TensorJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INAPPLICABLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NUMERIC: i32 = 70;

#[derive(Debug, Parser)]
#[command(name = "tphase", version, about = "Phases of even-order tensors and small phase certificates for MLTI systems")]
struct Cli {
    /// Report angles in degrees instead of radians.
    #[arg(long, global = true)]
    degrees: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shape, norm and rank of a tensor.
    Info { tensor: PathBuf },
    /// Sectoriality class and field angle.
    Classify {
        tensor: PathBuf,
        /// Number of rotation angles sampled (0.5° spacing by default).
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Threshold on `max f`, relative to the Frobenius norm.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Phases of a sectorial tensor, sorted descending, and their center.
    Phases { tensor: PathBuf },
    /// Sectorial decomposition `A = Qᴴ * D * Q`.
    Decompose {
        tensor: PathBuf,
        #[arg(long)]
        out_q: Option<PathBuf>,
        #[arg(long)]
        out_d: Option<PathBuf>,
    },
    /// Boundary of the numerical range; CSV rows go to --out.
    Nrange {
        tensor: PathBuf,
        #[arg(long, default_value_t = 360)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The compression `Uᴴ * A * U`.
    Compress { a: PathBuf, u: PathBuf },
    /// Phase interlacing between `A` and `Uᴴ * A * U`.
    Interlace { a: PathBuf, u: PathBuf },
    /// Products of every k eigenvalues.
    Compound {
        a: PathBuf,
        #[arg(short)]
        k: usize,
    },
    /// Eigenvalue angles of `A*B` against `Φ(A) + Φ(B)`.
    Majorize { a: PathBuf, b: PathBuf },
    /// Whether `A + B` stays in the cone `C[α, β]`.
    ConeSum {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Phase threshold below which `I + A*B` keeps rank above `|I| − k`.
    Robust {
        a: PathBuf,
        #[arg(short)]
        k: usize,
        /// Also build the worst-case `B` and report the rank drop it causes.
        #[arg(long)]
        construct: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phases of the nonzero block of a quasi-sectorial tensor.
    QuasiPhases { a: PathBuf },
    /// `A = U * [O O; O A_s]_n * Uᴴ` with mode n shrunk to J.
    QuasiBlock {
        a: PathBuf,
        #[arg(short)]
        n: usize,
        #[arg(long)]
        jn: usize,
        #[arg(long)]
        out_u: Option<PathBuf>,
        #[arg(long)]
        out_s: Option<PathBuf>,
    },
    /// Peak gain of a stable system over frequency.
    Hinf {
        system: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WMIN)]
        wmin: f64,
        #[arg(long, default_value_t = DEFAULT_WMAX)]
        wmax: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
    /// Small phase / small gain certificates for the loop of G and H.
    Stability {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionArg::Both)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        grid_points: usize,
        /// Per-frequency CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability of G against every H in the phase cone of a scalar weight h.
    ConeCheck {
        g: PathBuf,
        /// Numerator coefficients of h, highest power first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        h_num: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        h_den: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        grid_points: usize,
    },
    /// Writes a seeded fixture tensor or system.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// θ₁..θ₄ for the worked examples.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        thetas: Option<Vec<f64>>,
        /// Diagonal angles; random in [lo, hi] when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        angles: Option<Vec<f64>>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        hi: f64,
        /// mlti-stable: draw a strictly positive real system.
        #[arg(long)]
        passive: bool,
        /// Destination file; the fixture goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CriterionArg {
    Phase,
    Gain,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    Identity,
    Diagonal,
    Sectorial,
    Example1,
    Example2,
    MltiStable,
}

/// Failure carried to the exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

type Outcome = std::result::Result<(Value, i32), Failure>;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotSectorial | Error::Precondition(_) | Error::Domain(_) => EXIT_INAPPLICABLE,
        Error::Range(_) | Error::Size(_) => EXIT_USAGE,
        Error::Shape(_) | Error::Format(_) => EXIT_DATA,
        Error::Singular { .. }
        | Error::RankDeficient(_)
        | Error::NotPositiveDefinite { .. }
        | Error::Numeric(_)
        | Error::Pole(_)
        | Error::IllPosed(_) => EXIT_NUMERIC,
    }
}

/// Runs one command line (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    run_to(argv, &mut stdout)
}

/// [`run`] with stdout redirected to `out`.
pub fn run_to<I, T>(argv: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            let msg = e.kind().to_string();
            let _ = writeln!(out, "{}", to_json(&json!({ "error": msg })));
            return EXIT_USAGE;
        }
    };
    configure_threads();
    let (doc, code) = match dispatch(&cli) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("tphase: {msg}");
            (json!({ "error": msg }), EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("tphase: {e}");
            (json!({ "error": e.to_string() }), exit_code(&e))
        }
    };
    if writeln!(out, "{}", to_json(&doc)).is_err() {
        return EXIT_DATA;
    }
    code
}

/// Honors `TP_THREADS` by sizing the global rayon pool once.
fn configure_threads() {
    let Some(n) = std::env::var("TP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) else { return };
    // a second call in the same process finds the pool built and is a no-op
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
}

fn value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn tensor_value(t: &DenseTensor) -> Value {
    value(&TensorJson::from(t))
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inapplicable => EXIT_INAPPLICABLE,
    }
}

fn ok_code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

struct Angles(bool);

impl Angles {
    fn one(&self, x: f64) -> f64 {
        if self.0 {
            x.to_degrees()
        } else {
            x
        }
    }

    fn many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.one(x)).collect()
    }

    fn phases(&self, p: &PhaseVector) -> Value {
        json!({ "phases": self.many(&p.phases), "gamma": self.one(p.gamma) })
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let io_err = |e: std::io::Error| Failure::Lib(Error::Format(format!("{}: {e}", path.display())));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

fn grid(points: usize) -> Result<FrequencyGrid, Failure> {
    FrequencyGrid::with_points(points).map_err(|e| Failure::Usage(e.to_string()))
}

fn dispatch(cli: &Cli) -> Outcome {
    let deg = Angles(cli.degrees);
    match &cli.command {
        Command::Info { tensor } => {
            let a = read_tensor(tensor)?;
            let mut doc = json!({
                "row_dims": a.row_dims(),
                "col_dims": a.col_dims(),
                "rows": a.shape().rows(),
                "cols": a.shape().cols(),
                "frobenius_norm": a.frobenius_norm(),
                "even_square": a.is_even_square(),
            });
            if a.is_even_square() {
                let r = classify(&a, ClassifyOptions::default())?;
                doc["rank"] = json!(a.rank(crate::tensor::RANK_TOL)?);
                doc["class"] = value(&r.class);
            }
            Ok((doc, EXIT_OK))
        }
        Command::Classify { tensor, grid, tol } => {
            if *grid < 8 || !(*tol > 0.0) {
                return Err(Failure::Usage("--grid must be at least 8 and --tol positive".into()));
            }
            let a = read_tensor(tensor)?;
            let r = classify(&a, ClassifyOptions { grid: *grid, tol: *tol })?;
            let mut doc = value(&r);
            doc["field_angle"] = json!(deg.one(r.field_angle));
            Ok((doc, EXIT_OK))
        }
        Command::Phases { tensor } => {
            let a = read_tensor(tensor)?;
            let p = phases(&a)?;
            if p.ill_conditioned {
                eprintln!("tphase: phases are ill-conditioned (0 is close to the numerical range)");
            }
            Ok((deg.phases(&p), EXIT_OK))
        }
        Command::Decompose { tensor, out_q, out_d } => {
            let a = read_tensor(tensor)?;
            let dec = sectorial_decomposition(&a)?;
            if let Some(p) = out_q {
                write_tensor(p, &dec.q)?;
            }
            if let Some(p) = out_d {
                write_tensor(p, &dec.d)?;
            }
            let doc = json!({ "angles": deg.many(&dec.angles), "residual": dec.residual(&a)? });
            Ok((doc, EXIT_OK))
        }
        Command::Nrange { tensor, samples, out } => {
            let a = read_tensor(tensor)?;
            let b = nr_boundary(&a, *samples)?;
            if let Some(p) = out {
                write_file(p, |w| b.write_csv(w))?;
            }
            let re = b.points.iter().map(|z| z.re);
            let im = b.points.iter().map(|z| z.im);
            let doc = json!({
                "samples": b.angles.len(),
                "re_range": [re.clone().fold(f64::INFINITY, f64::min), re.fold(f64::NEG_INFINITY, f64::max)],
                "im_range": [im.clone().fold(f64::INFINITY, f64::min), im.fold(f64::NEG_INFINITY, f64::max)],
            });
            Ok((doc, EXIT_OK))
        }
        Command::Compress { a, u } => {
            let c = compress(&read_tensor(a)?, &read_tensor(u)?)?;
            Ok((tensor_value(&c), EXIT_OK))
        }
        Command::Interlace { a, u } => {
            let r = check_interlacing(&read_tensor(a)?, &read_tensor(u)?)?;
            Ok((value(&r), ok_code(r.ok)))
        }
        Command::Compound { a, k } => Ok((value(&compound_spectrum(&read_tensor(a)?, *k)?), EXIT_OK)),
        Command::Majorize { a, b } => {
            let r = majorization_check(&read_tensor(a)?, &read_tensor(b)?)?;
            let code = if r.precondition_met { ok_code(r.ok) } else { EXIT_INAPPLICABLE };
            Ok((value(&r), code))
        }
        Command::ConeSum { a, b, alpha, beta } => {
            let cone = ConeSpec::interval(*alpha, *beta).map_err(|e| Failure::Usage(e.to_string()))?;
            let r = cone_closure_check(&read_tensor(a)?, &read_tensor(b)?, cone)?;
            Ok((value(&r), ok_code(r.ok)))
        }
        Command::Robust { a, k, construct, out } => {
            let a = read_tensor(a)?;
            let threshold = rank_robustness_threshold(&a, *k)?;
            let mut doc = json!({ "k": k, "threshold": deg.one(threshold) });
            if *construct {
                let b = worst_case_b(&a, *k)?;
                doc["rank_drop"] = value(&rank_drop(&a, &b, RANK_DROP_TOL)?);
                if let Some(p) = out {
                    write_tensor(p, &b)?;
                }
            }
            Ok((doc, EXIT_OK))
        }
        Command::QuasiPhases { a } => Ok((deg.phases(&quasi_phases(&read_tensor(a)?)?), EXIT_OK)),
        Command::QuasiBlock { a, n, jn, out_u, out_s } => {
            let a = read_tensor(a)?;
            let d = quasi_blocked_decomposition(&a, *n, *jn)?;
            if let Some(p) = out_u {
                write_tensor(p, &d.u)?;
            }
            if let Some(p) = out_s {
                write_tensor(p, &d.a_s)?;
            }
            let doc = json!({
                "residual": d.residual,
                "a_s_class": value(&d.a_s_class),
                "a_s": tensor_value(&d.a_s),
            });
            Ok((doc, EXIT_OK))
        }
        Command::Hinf { system, wmin, wmax, points } => {
            let g = MltiSystem::read(system)?;
            let grid = FrequencyGrid::log_spaced(*wmin, *wmax, *points).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok((value(&hinf_norm(&g, &grid)?), EXIT_OK))
        }
        Command::Stability { g, h, criterion, grid_points, out } => {
            let (g, h) = (MltiSystem::read(g)?, MltiSystem::read(h)?);
            let criterion = match criterion {
                CriterionArg::Phase => Criterion::Phase,
                CriterionArg::Gain => Criterion::Gain,
                CriterionArg::Both => Criterion::Both,
            };
            let r = stability_report(&g, &h, &grid(*grid_points)?, criterion)?;
            if let Some(p) = out {
                write_file(p, |w| r.write_csv(w))?;
            }
            let phase = r.small_phase;
            let gain = r.small_gain.as_ref().map(|s| s.verdict);
            // either certificate suffices on its own
            let code = match (phase, gain) {
                (Some(Verdict::Pass), _) | (_, Some(Verdict::Pass)) => EXIT_OK,
                (Some(Verdict::Inapplicable), _) => EXIT_INAPPLICABLE,
                _ => EXIT_FAIL,
            };
            eprintln!("tphase: {}", r.note);
            let mut doc = value(&r);
            if cli.degrees {
                for rec in doc["records"].as_array_mut().into_iter().flatten() {
                    for key in ["phimax_g", "phimin_g", "phimax_h", "phimin_h", "margin_hi", "margin_lo"] {
                        if let Some(x) = rec[key].as_f64() {
                            rec[key] = json!(x.to_degrees());
                        }
                    }
                }
            }
            Ok((doc, code))
        }
        Command::ConeCheck { g, h_num, h_den, grid_points } => {
            let g = MltiSystem::read(g)?;
            let h = ScalarWeight::new(h_num, h_den)?;
            let r = cone_condition_check(&g, &h, &grid(*grid_points)?)?;
            Ok((value(&r), verdict_code(r.verdict)))
        }
        Command::Gen { kind, dims, seed, thetas, angles, lo, hi, passive, out } => {
            let fixture = generate(*kind, dims, *seed, thetas.as_deref(), angles.as_deref(), (*lo, *hi), *passive)?;
            match out {
                Some(p) => {
                    write_file(p, |w| writeln!(w, "{}", to_json(&fixture)))?;
                    Ok((json!({ "written": p.display().to_string() }), EXIT_OK))
                }
                None => Ok((fixture, EXIT_OK)),
            }
        }
    }
}

fn generate(
    kind: GenKind,
    dims: &[usize],
    seed: u64,
    thetas: Option<&[f64]>,
    angles: Option<&[f64]>,
    (lo, hi): (f64, f64),
    passive: bool,
) -> Result<Value, Failure> {
    let usage = |e: Error| Failure::Usage(e.to_string());
    let need_thetas = || thetas.ok_or_else(|| Failure::Usage("--thetas θ1,θ2,θ3,θ4 is required".into()));
    let t = match kind {
        GenKind::Identity => DenseTensor::identity(dims).map_err(usage)?,
        GenKind::Diagonal => {
            let n: usize = dims.iter().product();
            let list = match angles {
                Some(a) => a.to_vec(),
                None => {
                    use rand::Rng;
                    let mut r = rng(seed);
                    let (a, b) = (lo.max(-FRAC_PI_2), hi.min(FRAC_PI_2));
                    if !(b >= a) {
                        return Err(Failure::Usage(format!("empty angle interval [{lo}, {hi}]")));
                    }
                    (0..n).map(|_| r.random_range(a..=b)).collect()
                }
            };
            let values: Vec<C64> = list.iter().map(|&x| C64::from_polar(1.0, x)).collect();
            DenseTensor::diagonal(dims, &values).map_err(usage)?
        }
        GenKind::Sectorial => random_sectorial(dims, (lo, hi), seed).map_err(usage)?.tensor,
        GenKind::Example1 => example1(need_thetas()?).map_err(usage)?,
        GenKind::Example2 => example2(need_thetas()?).map_err(usage)?,
        GenKind::MltiStable => {
            let sys = if passive { random_passive_system(dims, seed) } else { random_stable_system(dims, seed) };
            return Ok(value(&SystemJson::from(&sys.map_err(usage)?)));
        }
    };
    Ok(tensor_value(&t))
}
