//! End-to-end acceptance run. Executes every criterion on a single worker
//! thread and prints one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use serde_json::{json, Value};
use tensor_phase::analysis::{
    check_interlacing, compound_membership_witness, majorization_check, quasi_blocked_decomposition,
    quasi_inequality_check, quotient_containment_check, random_cone_member, rank_drop, rank_robustness_threshold,
    sum_phase_extremes_check, worst_case_b,
};
use tensor_phase::control::{
    block_2x2, block_unfold_permutation, small_phase_check, stability_report, Criterion, FrequencyGrid, LoopVerdict,
    MltiSystem, Verdict, random_passive_system, random_stable_system,
};
use tensor_phase::error::Error;
use tensor_phase::numerics::{Matrix, C64};
use tensor_phase::phase::{phases, sectorial_decomposition, wrap_angle};
use tensor_phase::tensor::random::{
    planted_sectorial, random_column_orthogonal, random_nonsingular, random_sectorial, random_tensor, rng,
    unitary_matrix, FixtureRng,
};
use tensor_phase::tensor::{ivec_inverse, DenseTensor, Shape};
use tensor_phase::{cli, fixtures, fmt};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if $cond {} else {
            return Err(format!($($msg)*));
        }
    };
}

fn lib<T>(r: Result<T, Error>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

const RUNTIME_BUDGET: Duration = Duration::from_secs(600);

fn main() {
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().expect("single-threaded pool");
    let criteria: [Check; 10] = [
        ("isomorphism and block unfolding", isomorphism),
        ("four-phase reference tensor", reference_phases),
        ("decomposition round trip", decomposition_round_trip),
        ("congruence invariance", congruence_invariance),
        ("interlacing and extremal sums", interlacing_and_sums),
        ("majorization", majorization),
        ("compound witnesses", compound_witnesses),
        ("rank robustness", rank_robustness),
        ("small phase soundness", small_phase_soundness),
        ("quasi-sectorial suite", quasi_sectorial),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    let total = start.elapsed();
    if total <= RUNTIME_BUDGET {
        println!("criterion 11 PASS  runtime: {:.1}s of {}s budget, one thread", total.as_secs_f64(), RUNTIME_BUDGET.as_secs());
    } else {
        failed += 1;
        println!("criterion 11 FAIL  runtime: {:.1}s exceeds {}s", total.as_secs_f64(), RUNTIME_BUDGET.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn random_dims(r: &mut FixtureRng, max_dim: usize) -> Vec<usize> {
    let order = r.random_range(1..=2);
    (0..order).map(|_| r.random_range(1..=max_dim)).collect()
}

fn multi_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = dims.iter().product();
    (1..=n).map(|k| ivec_inverse(k, dims).expect("in range")).collect()
}

/// First-index-fastest 0-based position of a 1-based index tuple, computed
/// without the library.
fn linear(idx: &[usize], dims: &[usize]) -> usize {
    let mut stride = 1;
    let mut pos = 0;
    for (&i, &d) in idx.iter().zip(dims) {
        pos += (i - 1) * stride;
        stride *= d;
    }
    pos
}

fn isomorphism() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..1000u64 {
        let mut r = rng(1_000_000 + seed);
        let (di, dj, dk) = (random_dims(&mut r, 4), random_dims(&mut r, 4), random_dims(&mut r, 4));
        let a = random_tensor(&lib(Shape::new(di.clone(), dj.clone()), "shape")?, 2 * seed);
        let b = random_tensor(&lib(Shape::new(dj.clone(), dk.clone()), "shape")?, 2 * seed + 1);
        let a2 = random_tensor(a.shape(), 5000 + seed);
        let (ri, rj, rk) = (multi_indices(&di), multi_indices(&dj), multi_indices(&dk));

        for i in &ri {
            for j in &rj {
                let v = lib(a.get(i, j), "get")?;
                ensure!(a.unfold()[(linear(i, &di), linear(j, &dj))] == v, "unfolding disagrees with entry at {i:?},{j:?}");
            }
        }

        let prod = lib(a.einstein_product(&b), "product")?;
        worst = worst.max(prod.unfold().max_abs_diff(&a.unfold().mul(b.unfold())));
        for i in &ri {
            for k in &rk {
                let want: C64 = rj.iter().map(|j| a.get(i, j).unwrap() * b.get(j, k).unwrap()).sum();
                worst = worst.max((lib(prod.get(i, k), "get")? - want).norm());
            }
        }

        let ah = a.conj_transpose();
        worst = worst.max(ah.unfold().max_abs_diff(&a.unfold().adjoint()));
        for i in &ri {
            for j in &rj {
                worst = worst.max((ah.get(j, i).unwrap() - a.get(i, j).unwrap().conj()).norm());
            }
        }

        let c = C64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        worst = worst.max(a.scalar_mul(c).unfold().max_abs_diff(&a.unfold().scale(c)));
        worst = worst.max(lib(a.add(&a2), "add")?.unfold().max_abs_diff(&lib(a.unfold().add(a2.unfold()), "add")?));

        block_identity(&mut r, seed)?;
    }
    ensure!(worst <= 1e-12, "max homomorphism deviation {worst:.3e}");
    Ok(format!("1000 pairs, max deviation {worst:.2e}, block unfolding bit-exact"))
}

/// `unfold([A B; C D]_n) = P [unfold A, unfold B; unfold C, unfold D] Pᵀ`
/// with no roundoff, plus entrywise placement per the block definition.
fn block_identity(r: &mut FixtureRng, seed: u64) -> Result<(), String> {
    let order = r.random_range(1..=3);
    let max_dim = if order == 3 { 2 } else { 3 };
    let dims: Vec<usize> = (0..order).map(|_| r.random_range(1..=max_dim)).collect();
    let n = r.random_range(1..=dims.len());
    let s = lib(Shape::square(&dims), "shape")?;
    let t: Vec<DenseTensor> = (0..4).map(|k| random_tensor(&s, 7_000_000 + 4 * seed + k)).collect();
    let blk = lib(block_2x2(&t[0], &t[1], &t[2], &t[3], n), "block")?;

    let m = s.rows();
    let big = Matrix::from_fn(2 * m, 2 * m, |i, j| t[2 * (i / m) + j / m].unfold()[(i % m, j % m)]);
    let p = lib(block_unfold_permutation(&dims, n), "permutation")?.matrix();
    let rhs = p.mul(&big).mul(&p.transpose());
    ensure!(blk.unfold() == &rhs, "dims {dims:?} n {n}: P·blocks·Pᵀ differs from the block tensor");

    let mut doubled = dims.clone();
    doubled[n - 1] *= 2;
    let idx = multi_indices(&doubled);
    let half = dims[n - 1];
    for i in &idx {
        for j in &idx {
            let (bi, bj) = (usize::from(i[n - 1] > half), usize::from(j[n - 1] > half));
            let (mut li, mut lj) = (i.clone(), j.clone());
            li[n - 1] -= bi * half;
            lj[n - 1] -= bj * half;
            ensure!(blk.get(i, j).unwrap() == t[2 * bi + bj].get(&li, &lj).unwrap(), "dims {dims:?} n {n}: misplaced entry {i:?},{j:?}");
        }
    }
    Ok(())
}

fn reference_phases() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("example1.json");
    let p = path.to_str().unwrap();
    let mut sink = Vec::new();
    let code = cli::run_to(["tphase", "gen", "example1", "--thetas", "0.3,0.7,-0.4,1.1", "--out", p], &mut sink);
    ensure!(code == 0, "gen exited with {code}");
    let mut out = Vec::new();
    let code = cli::run_to(["tphase", "phases", p], &mut out);
    ensure!(code == 0, "phases exited with {code}: {}", String::from_utf8_lossy(&out));
    let v: Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let got: Vec<f64> = v["phases"].as_array().ok_or("no phases array")?.iter().filter_map(Value::as_f64).collect();
    let want = [1.1, 0.7, 0.3, -0.4];
    ensure!(got.len() == 4, "expected 4 phases, got {got:?}");
    let dev = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    ensure!(dev <= 1e-8, "phases {got:?}, deviation {dev:.2e}");
    Ok(format!("phases {got:?}, max deviation {dev:.1e}"))
}

fn sectorial_dims(i: u64) -> [usize; 2] {
    if i.is_multiple_of(2) {
        [2, 2]
    } else {
        [2, 3]
    }
}

fn random_interval(r: &mut FixtureRng) -> (f64, f64) {
    let lo = r.random_range(-1.5..0.0);
    (lo, lo + r.random_range(0.2..2.8))
}

fn decomposition_round_trip() -> Outcome {
    let (mut worst_res, mut worst_angle) = (0.0f64, 0.0f64);
    for i in 0..500u64 {
        let mut r = rng(2_000_000 + i);
        let planted = lib(random_sectorial(&sectorial_dims(i), random_interval(&mut r), 2_100_000 + i), "generate")?;
        let a = &planted.tensor;
        let dec = lib(sectorial_decomposition(a), "decompose")?;
        let recon = lib(dec.q.conj_transpose().einstein_product(&dec.d).and_then(|x| x.einstein_product(&dec.q)), "product")?;
        let res = lib(a.sub(&recon), "sub")?.frobenius_norm() / a.frobenius_norm();
        let mut angles = dec.angles.clone();
        angles.sort_by(|x, y| y.total_cmp(x));
        let dev = angles.iter().zip(&planted.phases).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure!(res <= 1e-8, "instance {i}: relative residual {res:.2e}");
        ensure!(dev <= 1e-7, "instance {i}: angle deviation {dev:.2e}");
        worst_res = worst_res.max(res);
        worst_angle = worst_angle.max(dev);
    }
    Ok(format!("500 tensors, residual ≤ {worst_res:.1e}·‖A‖, angles within {worst_angle:.1e}"))
}

fn congruence_invariance() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..500u64 {
        let mut r = rng(3_000_000 + i);
        let dims = sectorial_dims(i);
        let a = lib(random_sectorial(&dims, random_interval(&mut r), 3_100_000 + i), "generate")?.tensor;
        let t = lib(random_nonsingular(&dims, 3_200_000 + i), "generate")?;
        let b = lib(t.conj_transpose().einstein_product(&a).and_then(|x| x.einstein_product(&t)), "product")?;
        let pa = lib(phases(&a), "phases of A")?;
        let pb = lib(phases(&b), "phases of TᴴAT")?.aligned_to(pa.gamma);
        let dev = pa.phases.iter().zip(&pb.phases).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure!(dev <= 1e-6, "instance {i}: deviation {dev:.2e}");
        worst = worst.max(dev);
    }
    Ok(format!("500 pairs, max deviation {worst:.1e}"))
}

fn interlacing_and_sums() -> Outcome {
    let mut worst = f64::INFINITY;
    for i in 0..500u64 {
        let mut r = rng(4_000_000 + i);
        let dims = sectorial_dims(i);
        let a = lib(random_sectorial(&dims, random_interval(&mut r), 4_100_000 + i), "generate")?.tensor;
        let cols: &[&[usize]] = if i % 2 == 0 { &[&[1], &[2], &[3], &[3, 1]] } else { &[&[2], &[3], &[2, 2], &[5]] };
        let cdims = cols[r.random_range(0..cols.len())].to_vec();
        let shape = lib(Shape::new(dims.to_vec(), cdims), "shape")?;
        let c = if r.random_bool(0.5) { lib(random_column_orthogonal(&shape, 4_200_000 + i), "generate")? } else { random_tensor(&shape, 4_200_000 + i) };
        let rep = lib(check_interlacing(&a, &c), "interlacing")?;
        let m = rep.margins.iter().copied().fold(f64::INFINITY, f64::min);
        ensure!(rep.ok && m >= -1e-6, "interlacing instance {i}: violations {:?}, margin {m:.2e}", rep.violations);
        worst = worst.min(m);
    }
    let mut worst_attain = 0.0f64;
    for i in 0..500u64 {
        let mut r = rng(4_500_000 + i);
        let dims = sectorial_dims(i);
        let a = lib(random_sectorial(&dims, random_interval(&mut r), 4_600_000 + i), "generate")?.tensor;
        let probe = random_tensor(&lib(Shape::new(dims.to_vec(), vec![dims[0]]), "shape")?, 4_700_000 + i);
        let rep = lib(sum_phase_extremes_check(&a, 1, Some(&probe)), "extremal sums")?;
        let attain = rep.margins[0].abs().max(rep.margins[1].abs());
        let bounds = rep.margins[2].min(rep.margins[3]);
        ensure!(rep.ok && attain <= 1e-6 && bounds >= -1e-6, "extremal sum instance {i}: margins {:?}", rep.margins);
        worst_attain = worst_attain.max(attain);
    }
    Ok(format!("500 compressions, min margin {worst:.1e}; 500 extremal sums attained within {worst_attain:.1e}"))
}

fn centered(t: &DenseTensor) -> Result<DenseTensor, String> {
    let g = lib(phases(t), "phases")?.gamma;
    Ok(t.scalar_mul(C64::from_polar(1.0, -g)))
}

fn majorization() -> Outcome {
    let mut worst_total = 0.0f64;
    for i in 0..500u64 {
        let mut r = rng(5_000_000 + i);
        let dims = sectorial_dims(i);
        let a = centered(&lib(random_sectorial(&dims, random_interval(&mut r), 5_100_000 + i), "generate")?.tensor)?;
        let b = centered(&lib(random_sectorial(&dims, random_interval(&mut r), 5_200_000 + i), "generate")?.tensor)?;
        let rep = lib(majorization_check(&a, &b), "majorization")?;
        ensure!(rep.precondition_met, "instance {i}: eigenvalue angle on the window edge");
        let total = rep.margins.last().copied().unwrap_or(f64::NAN).abs();
        let partial = rep.margins.iter().copied().fold(f64::INFINITY, f64::min);
        ensure!(rep.ok && total <= 1e-6 && partial >= -1e-6, "instance {i}: margins {:?}", rep.margins);
        worst_total = worst_total.max(total);
    }
    Ok(format!("500 pairs, total-sum gap ≤ {worst_total:.1e}"))
}

fn compound_witnesses() -> Outcome {
    let shape = lib(Shape::square(&[2, 3]), "shape")?;
    let (mut worst, mut worst_q) = (0.0f64, 0.0f64);
    for i in 0..200u64 {
        let mut r = rng(6_000_000 + i);
        let k = 1 + (i % 3) as usize;
        let a = random_tensor(&shape, 6_100_000 + i);
        let mut subset: Vec<usize> = sample(&mut r, 6, k).into_iter().map(|x| x + 1).collect();
        subset.sort_unstable();
        let w = lib(compound_membership_witness(&a, &subset), "witness")?;
        ensure!(w.ok && w.relative_error <= 1e-6, "instance {i} subset {subset:?}: relative error {:.2e}", w.relative_error);
        worst = worst.max(w.relative_error);

        let b = lib(random_sectorial(&[2, 3], random_interval(&mut r), 6_200_000 + i), "generate")?.tensor;
        let q = lib(quotient_containment_check(&a, &b, k, 3), "quotient")?;
        let e = q.entries.iter().map(|e| e.relative_error).fold(0.0, f64::max);
        ensure!(q.ok && e <= 1e-6, "quotient instance {i}: relative error {e:.2e}");
        worst_q = worst_q.max(e);
    }
    Ok(format!("200 subsets at |I| = 6, relative error ≤ {worst:.1e}; quotient witnesses ≤ {worst_q:.1e}"))
}

fn rank_robustness() -> Outcome {
    let dims = [2, 2];
    for i in 0..100u64 {
        let mut r = rng(8_000_000 + i);
        let a = lib(random_sectorial(&dims, random_interval(&mut r), 8_100_000 + i), "generate")?.tensor;
        for k in 1..=2 {
            let b = lib(worst_case_b(&a, k), "worst case")?;
            let d = lib(rank_drop(&a, &b, 1e-7), "rank")?;
            ensure!(d.near_minus_one == k && d.rank == 4 - k, "instance {i} k {k}: {} eigenvalues at −1, rank {}", d.near_minus_one, d.rank);
        }
    }
    let mut draws = 0;
    for k in 1..=2 {
        for i in 0..200u64 {
            let mut r = rng(8_500_000 + 1000 * k as u64 + i);
            let a = lib(random_sectorial(&dims, random_interval(&mut r), 8_600_000 + i), "generate")?.tensor;
            let alpha = lib(rank_robustness_threshold(&a, k), "threshold")? * r.random_range(0.3..0.999);
            let b = lib(random_cone_member(&dims, k, alpha, 8_700_000 + i), "cone member")?.tensor;
            let d = lib(rank_drop(&a, &b, 1e-7), "rank")?;
            ensure!(d.rank > 4 - k, "k {k} draw {i}: rank dropped to {}", d.rank);
            draws += 1;
        }
    }
    Ok(format!("100 tensors × k ∈ {{1,2}} hit −1 exactly k times; {draws} below-threshold draws, no rank drop"))
}

fn negated(g: &MltiSystem) -> Result<MltiSystem, String> {
    let m = C64::new(-1.0, 0.0);
    lib(MltiSystem::new(g.a().clone(), g.b().clone(), g.c().scalar_mul(m), g.d().scalar_mul(m)), "negate")
}

fn small_phase_soundness() -> Outcome {
    let dims = [2, 2];
    let grid = lib(FrequencyGrid::with_points(400), "grid")?;
    let (mut pass, mut fail, mut inapplicable, mut unstable) = (0, 0, 0, 0);
    for i in 0..200u64 {
        let seed = 9_000_000 + 2 * i;
        let passive = |s| lib(random_passive_system(&dims, s), "generate");
        let stable = |s| lib(random_stable_system(&dims, s), "generate");
        let (g, h) = match i % 5 {
            0 | 1 => (passive(seed)?, passive(seed + 1)?),
            2 => (passive(seed)?, stable(seed + 1)?),
            3 => (stable(seed)?, stable(seed + 1)?),
            _ => (passive(seed)?, negated(&passive(seed + 1)?)?),
        };
        let rep = lib(small_phase_check(&g, &h, &grid), "small phase")?;
        if rep.oracle != LoopVerdict::Stable {
            unstable += 1;
        }
        match rep.small_phase {
            Some(Verdict::Pass) => {
                ensure!(rep.oracle == LoopVerdict::Stable, "pair {i}: small phase passed but the loop is {:?}", rep.oracle);
                pass += 1;
            }
            Some(Verdict::Fail) => fail += 1,
            _ => inapplicable += 1,
        }
    }
    ensure!(pass >= 50, "only {pass} passes; the soundness check is too weak");
    let exhibits = complementarity()?;
    Ok(format!(
        "200 pairs: {pass} pass, {fail} fail, {inapplicable} inapplicable, {unstable} unstable loops, 0 counterexamples; {exhibits}"
    ))
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/complementarity")
}

/// Writes `text` to `path`, or checks it against an already archived copy.
fn archive(path: &Path, text: &str) -> Result<(), String> {
    match fs::read_to_string(path) {
        Ok(old) => {
            ensure!(old == text, "{} differs from the regenerated fixture", path.display());
            Ok(())
        }
        Err(_) => {
            fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
            fs::write(path, text).map_err(|e| e.to_string())
        }
    }
}

/// One pair certified only by small phase and one only by small gain; both
/// closed loops are stable.
fn complementarity() -> Outcome {
    let dims = [2, 2];
    let lag = lib(MltiSystem::first_order(&dims, 1.0, 1.0), "system")?;
    let id = lib(DenseTensor::identity(&dims), "identity")?;
    let neg_half = lib(MltiSystem::static_gain(id.scalar_mul(C64::new(-0.5, 0.0))), "system")?;
    let grid = lib(FrequencyGrid::with_points(400), "grid")?;
    for (name, sys, want_phase, want_gain) in
        [("phase_pass_gain_fail", &lag, Verdict::Pass, Verdict::Fail), ("gain_pass_phase_fail", &neg_half, Verdict::Fail, Verdict::Pass)]
    {
        let rep = lib(stability_report(sys, sys, &grid, Criterion::Both), "report")?;
        let gain = rep.small_gain.as_ref().ok_or("no small gain result")?;
        ensure!(
            rep.small_phase == Some(want_phase) && gain.verdict == want_gain && rep.oracle == LoopVerdict::Stable,
            "{name}: phase {:?}, gain {:?}, loop {:?}",
            rep.small_phase,
            gain.verdict,
            rep.oracle
        );
        let dir = fixture_dir().join(name);
        archive(&dir.join("g.json"), &(sys.to_json() + "\n"))?;
        archive(&dir.join("h.json"), &(sys.to_json() + "\n"))?;
        let summary = json!({
            "grid_points": rep.grid_points,
            "small_phase": rep.small_phase,
            "small_gain": gain,
            "oracle": rep.oracle,
        });
        archive(&dir.join("verdicts.json"), &(fmt::to_json(&summary) + "\n"))?;
    }
    Ok("complementarity pairs archived".into())
}

/// `V blkdiag(0, S) Vᴴ` over `(2,2)` with `S` sectorial of size `rank`.
fn quasi_instance(r: &mut FixtureRng, seed: u64) -> Result<(DenseTensor, Vec<f64>), String> {
    let rank = r.random_range(1..=3usize);
    let center = r.random_range(-PI..PI);
    let half = r.random_range(0.05..1.4);
    let angles: Vec<f64> = (0..rank).map(|_| center + r.random_range(-half..=half)).collect();
    let s = lib(planted_sectorial(&[rank], &angles, seed), "generate")?.tensor;
    let v = unitary_matrix(4, r);
    let pad = 4 - rank;
    let blk = Matrix::from_fn(4, 4, |i, j| if i < pad || j < pad { C64::new(0.0, 0.0) } else { s.unfold()[(i - pad, j - pad)] });
    let m = v.mul(&blk).mul(&v.adjoint());
    Ok((lib(DenseTensor::fold_square(m, &[2, 2]), "fold")?, angles))
}

fn quasi_sectorial() -> Outcome {
    let a = lib(fixtures::example2(&[0.3, 0.7, 0.4, 1.1]), "example")?;
    let rank = lib(a.rank(1e-10), "rank")?;
    ensure!(rank == 4, "rank {rank}");
    let qb = lib(quasi_blocked_decomposition(&a, 1, 2), "mode-1 decomposition")?;
    ensure!(qb.residual <= 1e-7, "mode-1 residual {:.2e}", qb.residual);
    let mode2 = quasi_blocked_decomposition(&a, 2, 1);
    ensure!(matches!(mode2, Err(Error::Domain(_))), "mode 2 gave {:?}", mode2.err());

    let (mut agree, mut inside, mut skipped, mut seed) = (0, 0, 0, 0u64);
    while agree < 200 {
        ensure!(seed < 2000, "too many instances near the window edge");
        let mut r = rng(10_000_000 + seed);
        let (t, angles) = quasi_instance(&mut r, 10_500_000 + seed)?;
        seed += 1;
        let alpha = r.random_range(-PI..PI);
        let edge = angles.iter().map(|&th| (wrap_angle(th - alpha).abs() - FRAC_PI_2).abs()).fold(f64::INFINITY, f64::min);
        if edge < 1e-3 {
            skipped += 1;
            continue;
        }
        let q = lib(quasi_inequality_check(&t, alpha), "quasi inequality")?;
        ensure!(q.ok == q.phases_in_window, "instance {seed}: inequality {} but window membership {}", q.ok, q.phases_in_window);
        inside += usize::from(q.ok);
        agree += 1;
    }
    Ok(format!(
        "rank 4, mode-1 residual {:.1e}, mode 2 rejected; 200 random instances agree ({inside} inside the window, {skipped} edge cases redrawn)",
        qb.residual
    ))
}
