//! End-to-end acceptance checks, one line of output per criterion.
//!
//! Each criterion compares the library against an oracle written here
//! independently (direct double sums, hand-rolled GF(2) elimination,
//! separate Monte-Carlo paths) on top of the library's own reports.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use forrlab::Parallel;
use forrlab_core::adversary::{barrier_budget, builtin_strategies, AdvantageJob, ExperimentConfig, FullRead, OriginProbe};
use forrlab_core::boolfun::{forrelation, Dyadic, Sign, TruthTable};
use forrlab_core::f2linalg::{BitMatrix, BitVector, HardMatrices};
use forrlab_core::instances::{sample_params, HFamily, HFunction, HardParams, Label, Variant};
use forrlab_core::job::Runner;
use forrlab_core::quantum::{accept_probability, simulate_circuit};
use forrlab_core::rorrelation::{
    max_over_g, rorr, sample_haar_orthogonal, HaarMaxJob, L1ConcentrationJob, OrthogonalMatrix, SearchMode,
};
use forrlab_core::seed::rng_for;
use forrlab_core::verifier::{
    verify_collision_lemma, verify_conditional_uniformity, verify_extremality, verify_marginal_uniformity,
    verify_pairwise_collisions, verify_row_rank_fraction, LemmaReport, Mode,
};
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, Box<dyn std::error::Error>>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn runner() -> Parallel {
    Parallel::new(None).expect("thread pool")
}

fn passed(r: &LemmaReport) -> Result<(), Box<dyn std::error::Error>> {
    if r.pass {
        Ok(())
    } else {
        Err(format!("{} n={} failed: {} (expected {}) {:?}", r.lemma, r.n, r.observed, r.expected, r.failures).into())
    }
}

// ---------------------------------------------------------------------------
// Oracles

/// `sum_{x,y} f(x) (-1)^<x,y> g(y)` by the definition, from point queries.
fn double_sum(n: usize, f: impl Fn(u64) -> i64, g: impl Fn(u64) -> i64) -> i64 {
    let size = 1u64 << n;
    let gs: Vec<i64> = (0..size).map(&g).collect();
    (0..size)
        .map(|x| {
            let inner: i64 = (0..size)
                .map(|y| if (x & y).count_ones() % 2 == 0 { gs[y as usize] } else { -gs[y as usize] })
                .sum();
            f(x) * inner
        })
        .sum()
}

fn params_sum(p: &HardParams) -> i64 {
    let n = p.n();
    double_sum(
        n,
        |x| p.eval_f(&BitVector::from_u64(n, x)).unwrap().to_i64(),
        |y| p.eval_g(&BitVector::from_u64(n, y)).unwrap().to_i64(),
    )
}

/// Walsh coefficients by the definition.
fn direct_walsh(t: &TruthTable) -> Vec<i64> {
    let size = t.len() as u64;
    (0..size)
        .map(|y| {
            (0..size)
                .map(|x| {
                    let v = t.get(x as usize).to_i64();
                    if (x & y).count_ones() % 2 == 0 { v } else { -v }
                })
                .sum()
        })
        .collect()
}

/// Rows as bitmasks; Gauss-Jordan over GF(2). `None` if singular.
fn gf2_inverse(rows: &[u32], n: usize) -> Option<Vec<u32>> {
    let mut a = rows.to_vec();
    let mut inv: Vec<u32> = (0..n).map(|i| 1 << i).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r] >> col & 1 == 1)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r] >> col & 1 == 1 {
                a[r] ^= a[col];
                inv[r] ^= inv[col];
            }
        }
    }
    Some(inv)
}

fn gf2_rank(rows: &[u32]) -> usize {
    let mut basis: Vec<u32> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

fn transpose(rows: &[u32], n: usize) -> Vec<u32> {
    (0..n)
        .map(|c| (0..n).fold(0, |acc, r| acc | ((rows[r] >> c & 1) << r)))
        .collect()
}

fn to_matrix(rows: &[u32], n: usize) -> BitMatrix {
    let bits: Vec<u64> = rows.iter().map(|&r| r as u64).collect();
    BitMatrix::from_row_bits(n, &bits)
}

/// Every `(A, a, h)` at `n = 2`, built here rather than by the verifier.
fn all_n2_params(variant: Variant) -> Vec<HardParams> {
    let mut out = Vec::new();
    for m in 0u32..16 {
        let rows = [m & 3, m >> 2];
        if gf2_rank(&rows) < 2 {
            continue;
        }
        for shift in 0..4u64 {
            for table in 0..4i8 {
                let h = TruthTable::from_signs(&[1 - 2 * (table & 1), 1 - 2 * (table >> 1 & 1)]).unwrap();
                let matrices = HardMatrices::from_parts(to_matrix(&rows, 2), BitVector::from_u64(2, shift)).unwrap();
                out.push(HardParams::new(matrices, HFunction::Table(h), variant, Label::Yes).unwrap());
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria

fn extremality() -> Outcome {
    let run = runner();
    let settings = all_n2_params(Variant::Standard);
    ensure!(settings.len() == 96, "expected 96 settings at n = 2, built {}", settings.len());
    for p in &settings {
        for (label, want) in [(Label::Yes, 8), (Label::No, -8)] {
            let q = p.with_label(label);
            ensure!(params_sum(&q) == want, "double sum is not {want} for {q:?}");
            let (f, g) = q.materialize().unwrap();
            let exact = if label == Label::Yes { Dyadic::ONE } else { -Dyadic::ONE };
            ensure!(forrelation(&f, &g).unwrap() == exact, "forrelation mismatch for {q:?}");
        }
    }
    let r = verify_extremality(&run, 2, Variant::Standard, HFamily::ExplicitTable, Mode::Exhaustive, 1)?;
    passed(&r)?;
    ensure!(r.count("instances") == Some(192), "verifier checked {:?} instances", r.count("instances"));
    for n in [4usize, 6, 8, 10] {
        let r = verify_extremality(&run, n, Variant::Standard, HFamily::ExplicitTable, Mode::Sampled { samples: 10_000 }, 100 + n as u64)?;
        passed(&r)?;
        ensure!(r.count("instances") == Some(20_000), "n = {n}: {:?} instances", r.count("instances"));
        // Spot check by the definition.
        let mut rng = rng_for(7, "acceptance-extremality", n as u64);
        let target = 1i64 << (3 * n / 2);
        for _ in 0..if n <= 6 { 50 } else { 3 } {
            let p = sample_params(n, Variant::Standard, HFamily::ExplicitTable, Label::Yes, &mut rng).unwrap();
            ensure!(params_sum(&p) == target, "yes double sum wrong at n = {n}");
            ensure!(params_sum(&p.with_label(Label::No)) == -target, "no double sum wrong at n = {n}");
        }
    }
    Ok("96 settings x 2 labels exhaustive at n = 2; 10^4 samples at n = 4, 6, 8, 10; all exact".into())
}

fn bentness() -> Outcome {
    let run = runner();
    for p in all_n2_params(Variant::Standard) {
        let (f, _) = p.materialize().unwrap();
        ensure!(direct_walsh(&f).iter().all(|c| c.abs() == 2), "not bent: {p:?}");
    }
    let mut bent_checked = 96;
    for n in [4usize, 6, 8, 10] {
        let r = verify_extremality(&run, n, Variant::Standard, HFamily::ExplicitTable, Mode::Sampled { samples: 10_000 }, 100 + n as u64)?;
        ensure!(r.count("bent_failures") == Some(0), "n = {n}: bentness failures reported");
        bent_checked += r.count("bent_checked").unwrap_or(0);
        let mut rng = rng_for(8, "acceptance-bent", n as u64);
        let magnitude = 1i64 << (n / 2);
        for _ in 0..if n <= 8 { 40 } else { 4 } {
            let p = sample_params(n, Variant::Standard, HFamily::ExplicitTable, Label::Yes, &mut rng).unwrap();
            let (f, g) = p.materialize().unwrap();
            let walsh = direct_walsh(&f);
            ensure!(walsh.iter().all(|c| c.abs() == magnitude), "f not bent at n = {n}");
            for (y, c) in walsh.iter().enumerate() {
                ensure!(g.get(y).to_i64() * magnitude == *c, "g is not the dual of f at n = {n}");
            }
        }
    }
    ensure!(bent_checked == 96 + 40_000, "checked {bent_checked} yes instances");
    Ok(format!("{bent_checked} yes instances bent with g the dual of f"))
}

fn quantum() -> Outcome {
    let mut pairs = 0;
    for a in 0..16usize {
        for b in 0..16usize {
            let f = TruthTable::from_fn(2, |x| Sign::from_bit(a >> x & 1 == 1)).unwrap();
            let g = TruthTable::from_fn(2, |x| Sign::from_bit(b >> x & 1 == 1)).unwrap();
            let exact = accept_probability(&f, &g).unwrap();
            let sum = double_sum(2, |x| f.get(x as usize).to_i64(), |y| g.get(y as usize).to_i64());
            // (1 + sum / 8) / 2 = (8 + sum) / 16.
            ensure!(exact == Dyadic::new(8 + sum, 4), "closed form wrong for f = {a:#x}, g = {b:#x}");
            let sim = simulate_circuit(&f, &g).unwrap();
            ensure!((sim - exact.to_f64()).abs() <= 1e-12, "circuit {sim} vs closed form {exact}");
            pairs += 1;
        }
    }
    for p in all_n2_params(Variant::Standard) {
        let (f, g) = p.materialize().unwrap();
        ensure!(accept_probability(&f, &g).unwrap() == Dyadic::ONE, "yes instance not accepted surely");
        let (f, g) = p.with_label(Label::No).materialize().unwrap();
        ensure!(accept_probability(&f, &g).unwrap() == Dyadic::ZERO, "no instance accepted");
    }
    let mut rng = rng_for(9, "acceptance-quantum", 0);
    for n in [4usize, 6, 8] {
        let p = sample_params(n, Variant::Standard, HFamily::ExplicitTable, Label::Yes, &mut rng).unwrap();
        let (f, g) = p.materialize().unwrap();
        ensure!((simulate_circuit(&f, &g).unwrap() - 1.0).abs() <= 1e-12, "yes circuit at n = {n}");
        let (f, g) = p.with_label(Label::No).materialize().unwrap();
        ensure!(simulate_circuit(&f, &g).unwrap().abs() <= 1e-12, "no circuit at n = {n}");
    }
    Ok(format!("{pairs} pairs at n = 2 within 1e-12; 96 yes/no settings exact"))
}

fn marginal_uniformity() -> Outcome {
    let n = 4;
    let mut b1_hist = vec![0u64; 256];
    let mut invertible = 0;
    for m in 0u32..1 << 16 {
        let rows: Vec<u32> = (0..4).map(|i| m >> (4 * i) & 0xf).collect();
        if let Some(inv) = gf2_inverse(&rows, n) {
            invertible += 1;
            // B = (A^T)^{-1} = (A^{-1})^T; B1 is its top two rows.
            let b = transpose(&inv, n);
            b1_hist[(b[0] | b[1] << 4) as usize] += 1;
        }
    }
    ensure!(invertible == 20_160, "{invertible} invertible matrices");
    let mut full = 0;
    for (idx, &count) in b1_hist.iter().enumerate() {
        let rows = [idx as u32 & 0xf, idx as u32 >> 4];
        if gf2_rank(&rows) == 2 {
            full += 1;
            ensure!(count == 96, "full-rank B1 {idx:#x} seen {count} times");
        } else {
            ensure!(count == 0, "rank-deficient B1 {idx:#x} seen {count} times");
        }
    }
    ensure!(full == 210, "{full} full-rank matrices");
    let r = verify_marginal_uniformity(&runner(), n)?;
    passed(&r)?;
    ensure!(r.count("per_matrix") == Some(96) && r.count("full_row_rank") == Some(210), "verifier counts {:?}", r.counts);
    Ok("each of 210 full-row-rank 2x4 matrices is B1 for exactly 96 of 20160".into())
}

fn row_rank_fraction() -> Outcome {
    let run = runner();
    for (n, want) in [(2usize, 3u64), (4, 210)] {
        let half = n / 2;
        let space = 1u64 << (half * n);
        let full = (0..space)
            .filter(|&m| {
                let rows: Vec<u32> = (0..half).map(|i| (m >> (n * i)) as u32 & ((1 << n) - 1)).collect();
                gf2_rank(&rows) == half
            })
            .count() as u64;
        ensure!(full == want, "n = {n}: {full} full-rank, expected {want}");
        // full / space >= 1 - half / 2^half.
        ensure!(full << half >= ((1 << half) - half as u64) * space, "bound fails at n = {n}");
        let r = verify_row_rank_fraction(&run, n, Mode::Exhaustive, 0)?;
        passed(&r)?;
        ensure!(r.count("full_row_rank") == Some(want), "verifier count at n = {n}");
    }
    for n in [8usize, 12] {
        let r = verify_row_rank_fraction(&run, n, Mode::Sampled { samples: 1_000_000 }, 11)?;
        passed(&r)?;
        let freq = r.count("full_row_rank").unwrap() as f64 / 1e6;
        let product: f64 = (1..=n / 2).map(|i| 1.0 - 2f64.powi(i as i32 - 1 - n as i32)).product();
        let sigma = (product * (1.0 - product) / 1e6).sqrt();
        ensure!((freq - product).abs() <= 3.0 * sigma, "n = {n}: {freq} vs {product}");
        let bound = 1.0 - (n / 2) as f64 * 2f64.powi(-(n as i32) / 2);
        ensure!(freq >= bound - 3.0 * sigma, "n = {n}: {freq} below bound {bound}");
    }
    Ok("210/256 exact at n = 4; bound holds at n = 2, 4 exactly and n = 8, 12 within 3 sigma".into())
}

fn collision_lemma() -> Outcome {
    let run = runner();
    // x = y = 0 at n = 2 by hand: 12 of 24 settings.
    let mut hits = 0;
    let mut total = 0;
    for m in 0u32..16 {
        let rows = [m & 3, m >> 2];
        let Some(inv) = gf2_inverse(&rows, 2) else { continue };
        let b = transpose(&inv, 2);
        for a in 0u32..4 {
            total += 1;
            // A2 0 = 0, so the event is B1 a = 0.
            if (b[0] & a).count_ones() % 2 == 0 {
                hits += 1;
            }
        }
    }
    ensure!((hits, total) == (12, 24), "x = y = 0 at n = 2: {hits} of {total}");

    let mut rng = rng_for(12, "acceptance-collision", 0);
    for n in [2usize, 4] {
        let mut pairs = vec![
            (BitVector::zeros(n), BitVector::zeros(n)),
            (BitVector::zeros(n), BitVector::from_u64(n, 1)),
            (BitVector::from_u64(n, 1), BitVector::zeros(n)),
        ];
        while pairs.len() < 10 {
            pairs.push((BitVector::random(n, &mut rng), BitVector::random(n, &mut rng)));
        }
        let r = verify_collision_lemma(&run, n, &pairs, Mode::Exhaustive, 0)?;
        passed(&r)?;
        let settings = r.count("settings").unwrap();
        ensure!(settings == [24, 20_160 * 16][n / 2 - 1], "n = {n}: {settings} settings");
        for i in 0..pairs.len() {
            let h = r.count(&format!("pair_{i}")).unwrap();
            ensure!(h << (n / 2) == settings, "n = {n}, pair {i}: {h} of {settings}");
        }
    }
    let pairs = vec![(BitVector::random(12, &mut rng), BitVector::random(12, &mut rng))];
    let r = verify_collision_lemma(&run, 12, &pairs, Mode::Sampled { samples: 1_000_000 }, 13)?;
    passed(&r)?;
    let freq = r.count("pair_0").unwrap() as f64 / 1e6;
    let p = 1.0 / 64.0;
    ensure!((freq - p).abs() <= 3.0 * (p * (1.0 - p) / 1e6).sqrt(), "n = 12: {freq}");
    Ok(format!("exactly 2^(-n/2) for 10 pairs at n = 2, 4; n = 12 frequency {freq:.5} vs {p:.5}"))
}

fn pairwise_collisions() -> Outcome {
    let r = verify_pairwise_collisions(&runner(), 4, Mode::Exhaustive, 0)?;
    passed(&r)?;
    ensure!(r.count("differences") == Some(15), "{:?} difference classes", r.count("differences"));
    // For invertible A and d != 0, A d is uniform over nonzero vectors, so
    // A2 d = 0 for (2^2 - 1) / (2^4 - 1) = 1/5 of the matrices.
    ensure!(r.count("largest_hits") == Some(20_160 / 5), "largest {:?}", r.count("largest_hits"));
    ensure!(5 * 4 <= 3 * 4 * 4, "1/5 <= 3/4");
    Ok("every nonzero difference: probability 1/5 <= 3/4".into())
}

fn conditional_uniformity() -> Outcome {
    let (n, ell, trials) = (8usize, 4usize, 100_000u64);
    let r = verify_conditional_uniformity(&runner(), n, 2, ell, trials, 14)?;
    passed(&r)?;
    let not_e = r.count("not_e").unwrap();
    let bound = 3.0 * (ell * ell * n) as f64 / 16.0;
    ensure!((not_e as f64 / trials as f64) <= bound, "not-E frequency above {bound}");
    let cells: Vec<u64> = (0..16).map(|i| r.count(&format!("pattern_{i:04b}")).unwrap()).collect();
    let inside: u64 = cells.iter().sum();
    ensure!(inside + not_e == trials, "counts do not add up");
    let expected = inside as f64 / 16.0;
    let stat: f64 = cells.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // Upper 0.001 quantile of chi-square with 15 degrees of freedom.
    ensure!(stat <= 37.697, "chi-square {stat} above 37.697");
    Ok(format!("Pr[not E] = {:.4}, chi-square {stat:.2} on 15 dof", not_e as f64 / trials as f64))
}

fn adversary_barrier() -> Outcome {
    let run = runner();
    let mut lines = Vec::new();
    for n in [16usize, 20] {
        let d = barrier_budget(n);
        let bound = 2f64.powf(n as f64 / 4.0) / (6.0 * (n as f64).sqrt());
        ensure!((d as f64) <= bound && (d + 1) as f64 > bound, "budget {d} at n = {n}");
        for s in builtin_strategies() {
            let config = ExperimentConfig::new(n, Variant::Standard, HFamily::UniformLazy, d, 10_000);
            let r = run.run(&AdvantageJob::new(s.as_ref(), config, 15)?);
            ensure!(r.aborted == 0 && r.failed == 0, "{}: trials aborted", r.strategy);
            ensure!(r.max_queries <= d, "{} used {} queries", r.strategy, r.max_queries);
            ensure!(r.advantage.abs() <= 0.05 + r.ci, "{} at n = {n}: advantage {}", r.strategy, r.advantage);
            lines.push(format!("{}@{n}={:+.3}", r.strategy, r.advantage));
        }
    }
    let full = run.run(&AdvantageJob::new(
        &FullRead,
        ExperimentConfig::new(8, Variant::Standard, HFamily::UniformLazy, 512, 10_000),
        16,
    )?);
    ensure!(full.advantage == 1.0, "full-read advantage {}", full.advantage);
    let naive = run.run(&AdvantageJob::new(
        &OriginProbe,
        ExperimentConfig::new(8, Variant::Naive, HFamily::UniformLazy, 2, 10_000),
        17,
    )?);
    ensure!(naive.advantage == 1.0, "origin-probe on naive variant: {}", naive.advantage);
    Ok(format!("{}; full-read 1.0; origin-probe on naive 1.0", lines.join(" ")))
}

fn sketch() -> Outcome {
    let run = runner();
    for p in all_n2_params(Variant::Sketch) {
        ensure!(params_sum(&p) == 8, "sketch yes at n = 2");
        // 2^{-n/2} * 2^{3n/2} = 2^n.
        ensure!(params_sum(&p.with_label(Label::No)) == 4, "sketch no at n = 2");
    }
    let r = verify_extremality(&run, 2, Variant::Sketch, HFamily::ExplicitTable, Mode::Exhaustive, 0)?;
    passed(&r)?;
    for n in [4usize, 6, 8] {
        let r = verify_extremality(&run, n, Variant::Sketch, HFamily::ExplicitTable, Mode::Sampled { samples: 2_000 }, 18)?;
        passed(&r)?;
        let mut rng = rng_for(19, "acceptance-sketch", n as u64);
        for _ in 0..5 {
            let p = sample_params(n, Variant::Sketch, HFamily::ExplicitTable, Label::No, &mut rng).unwrap();
            ensure!(params_sum(&p) == 1 << n, "sketch no double sum at n = {n}");
            let (f, g) = p.materialize().unwrap();
            ensure!(forrelation(&f, &g).unwrap() == Dyadic::new(1, (n / 2) as u32), "sketch no at n = {n}");
        }
    }
    Ok("sketch yes = 1, sketch no = 2^(-n/2) at n = 2, 4, 6, 8".into())
}

fn rorrelation() -> Outcome {
    let run = runner();
    let mut rng = rng_for(20, "acceptance-rorr", 0);
    for _ in 0..10 {
        let u = sample_haar_orthogonal(4, &mut rng)?;
        for fm in 0..16usize {
            let f = TruthTable::from_fn(2, |x| Sign::from_bit(fm >> x & 1 == 1)).unwrap();
            let mut brute = f64::NEG_INFINITY;
            for gm in 0..16usize {
                let mut s = 0.0;
                for x in 0..4 {
                    for y in 0..4 {
                        let fx = if fm >> x & 1 == 1 { -1.0 } else { 1.0 };
                        let gy = if gm >> y & 1 == 1 { -1.0 } else { 1.0 };
                        s += fx * gy * u.get(x, y);
                    }
                }
                brute = brute.max(s / 4.0);
            }
            let (_, value) = max_over_g(&u, &f)?;
            ensure!((value - brute).abs() <= 1e-12, "max_over_g {value} vs brute force {brute}");
        }
    }
    let h = OrthogonalMatrix::normalized_hadamard(2);
    for a in 0..16usize {
        for b in 0..16usize {
            let f = TruthTable::from_fn(2, |x| Sign::from_bit(a >> x & 1 == 1)).unwrap();
            let g = TruthTable::from_fn(2, |x| Sign::from_bit(b >> x & 1 == 1)).unwrap();
            let want = double_sum(2, |x| f.get(x as usize).to_i64(), |y| g.get(y as usize).to_i64()) as f64 / 8.0;
            ensure!((rorr(&h, &f, &g)? - want).abs() <= 1e-9, "Hadamard rorr differs at {a:#x}, {b:#x}");
        }
    }
    let maxima = run.run(&HaarMaxJob::new(16, 100, SearchMode::Exhaustive, 21)?);
    ensure!(maxima.values.len() == 100, "{} draws", maxima.values.len());
    ensure!(maxima.values.iter().all(|v| *v < 1.0), "a Haar maximum reached {}", maxima.largest);
    let smallest = maxima.values.iter().copied().fold(f64::INFINITY, f64::min);

    let l1 = run.run(&L1ConcentrationJob::new(256, 100_000, 22)?);
    ensure!(l1.exceedances == 0, "{} exceedances of 0.99", l1.exceedances);
    // Oracle: normalised Gaussian vectors from a different sampler.
    let mut orng = rng_for(23, "acceptance-l1-oracle", 0);
    let oracle_samples = 20_000;
    let mut oracle = 0.0;
    for _ in 0..oracle_samples {
        let v: Vec<f64> = (0..256).map(|_| StandardNormal.sample(&mut orng)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        oracle += v.iter().map(|t| t.abs()).sum::<f64>() / norm / 16.0;
    }
    oracle /= oracle_samples as f64;
    ensure!((l1.mean - oracle).abs() <= 0.01, "mean {} vs oracle {oracle}", l1.mean);
    ensure!((oracle - (2.0 / std::f64::consts::PI).sqrt()).abs() <= 0.01, "oracle {oracle} far from sqrt(2/pi)");
    Ok(format!(
        "Haar N=16 maxima in [{smallest:.4}, {:.4}], mean {:.4}; l1 mean {:.5} vs oracle {oracle:.5}, max {:.4}",
        maxima.largest, maxima.mean, l1.mean, l1.max
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("extremality", extremality),
        ("bentness", bentness),
        ("quantum simulator", quantum),
        ("marginal uniformity", marginal_uniformity),
        ("full-row-rank fraction", row_rank_fraction),
        ("collision probability", collision_lemma),
        ("pairwise collisions", pairwise_collisions),
        ("conditional uniformity", conditional_uniformity),
        ("adversary barrier", adversary_barrier),
        ("sketch distributions", sketch),
        ("rorrelation", rorrelation),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}").into())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
