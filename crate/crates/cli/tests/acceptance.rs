//! Acceptance suite. Prints one pass/fail line per criterion; pass criterion
//! names (A1..A11) as arguments to run a subset.
//!
//! A10 trains on a labeled slice of at least 20,000 curves with conductor
//! below 10^6. It reads `data/curves_n1e6.csv` at the workspace root unless
//! `ECRANK_A10_CURVES` points elsewhere.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ecrank_core::arith::{sieve_primes, PrimeTable};
use ecrank_core::curve::{ap_good_prime, ap_record, ReductionType, WeierstrassCurve};
use ecrank_core::dataset::{build_feature_matrix, gen_random_weierstrass};
use ecrank_core::nn::{
    binary_mcc, build_cnn, build_fcnn, confusion_and_mcc, conv_out_len, cross_entropy_weighted, rk_statistic,
    train, BatchNorm1d, CnnConfig, Conv1d, Dense, Layer, Mode, Model, Samples, Standardize, Tensor, TrainConfig,
};
use ecrank_core::sums::{partial_euler_product, s0, s3, s5, s6, s6_with_step};
use ecrank_core::Error;
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("A1", a1_ap_oracle),
        ("A2", a2_hasse),
        ("A3", a3_euler_product),
        ("A4", a4_canonical_curves),
        ("A5", a5_s6_stability),
        ("A6", a6_gradients),
        ("A7", a7_architecture),
        ("A8", a8_metric),
        ("A9", a9_toy_learning),
        ("A10", a10_end_to_end),
        ("A11", a11_determinism),
    ];
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == name) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("{name} pass ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name} FAIL ({secs:.1}s): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn curve(a: [i64; 5]) -> WeierstrassCurve {
    WeierstrassCurve::from_ainvs(a).unwrap()
}

fn small_ainvs(c: &WeierstrassCurve, p: i64) -> [i64; 5] {
    c.ainvs().map(|a| (a % BigInt::from(p)).to_i64().unwrap().rem_euclid(p))
}

/// `p - #affine points` by trying every (x, y).
fn ap_by_enumeration(c: &WeierstrassCurve, p: u64) -> i64 {
    let p = p as i64;
    let [a1, a2, a3, a4, a6] = small_ainvs(c, p);
    let mut count = 0;
    for x in 0..p {
        let rhs = (((x + a2) * x % p + a4) * x % p + a6) % p;
        let lin = (a1 * x + a3) % p;
        for y in 0..p {
            if (y * ((y + lin) % p)) % p == rhs {
                count += 1;
            }
        }
    }
    p - count
}

fn divides(p: u64, n: &BigInt) -> bool {
    (n % BigInt::from(p)) == BigInt::from(0)
}

fn a1_ap_oracle() -> Outcome {
    let table = Arc::new(sieve_primes(500));
    let mut checked = 0;
    for r in gen_random_weierstrass(1000, 200, 1) {
        let c = r.curve().unwrap();
        let rec = ap_record(&c, &table);
        for (p, a, _) in rec.iter() {
            if divides(p, &c.disc) {
                continue;
            }
            let e = ap_by_enumeration(&c, p);
            ensure(e == a as i64, || format!("{:?} at p = {p}: enumeration {e}, character sum {a}", c.ainvs()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (curve, prime) pairs, no mismatches"))
}

fn a2_hasse() -> Outcome {
    let primes = sieve_primes(10_000).primes().to_vec();
    let curves: Vec<WeierstrassCurve> = gen_random_weierstrass(100_000, 1000, 2).iter().map(|r| r.curve().unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pairs = 0;
    while pairs < 10_000 {
        let c = &curves[rng.gen_range(0..curves.len())];
        let p = primes[rng.gen_range(0..primes.len())];
        if divides(p, &c.disc) {
            continue;
        }
        let a = ap_good_prime(c, p).unwrap() as i64;
        ensure(a * a <= 4 * p as i64, || format!("|a_{p}| = {a} on {:?}", c.ainvs()))?;
        pairs += 1;
    }
    let table = Arc::new(sieve_primes(10_000));
    let records = gen_random_weierstrass(1000, 50, 3);
    let n_max = records.iter().map(|r| r.conductor.clone()).max().unwrap();
    for r in &records {
        let rec = ap_record(&r.curve().unwrap(), &table);
        let m = build_feature_matrix(&r.conductor, &rec, &table, &n_max).unwrap();
        ensure(m.row(0).iter().all(|v| (-2.0..=2.0).contains(v)), || format!("{}: a_p/sqrt(p) outside [-2, 2]", r.id))?;
    }
    Ok(format!("{pairs} pairs within 2 sqrt(p); feature row 1 in [-2, 2] for {} curves", records.len()))
}

fn a3_euler_product() -> Outcome {
    let table = Arc::new(sieve_primes(1000));
    let mut worst: f64 = 0.0;
    for r in gen_random_weierstrass(10_000, 100, 4) {
        let rec = ap_record(&r.curve().unwrap(), &table);
        let split: f64 = rec
            .iter()
            .filter(|x| x.2 == ReductionType::SplitMultiplicative)
            .map(|(p, _, _)| (1.5 * (p as f64 - 1.0) / p as f64).ln())
            .sum();
        let lhs = (-(s5(&rec, 1000).unwrap() - split)).exp();
        let rhs = partial_euler_product(&rec, 1000, 1.0).unwrap();
        let err = (lhs - rhs).abs() / rhs.abs();
        ensure(err <= 1e-12, || format!("{}: {lhs} vs {rhs}", r.id))?;
        worst = worst.max(err);
    }
    Ok(format!("100 records, worst relative error {worst:.1e}"))
}

fn canonical() -> [(&'static str, [i64; 5], u32); 4] {
    [
        ("11a1", [0, -1, 1, -10, -20], 11),
        ("37a1", [0, 0, 1, -1, 0], 37),
        ("389a1", [0, 1, 1, -2, 0], 389),
        ("5077a1", [0, 0, 1, -7, 6], 5077),
    ]
}

fn a4_canonical_curves() -> Outcome {
    let t = Instant::now();
    // S6(2) needs a_p up to e^{4 pi} ~ 286751
    let table = Arc::new(PrimeTable::new(290_000));
    let mut rows = Vec::new();
    for (name, a, n) in canonical() {
        let rec = ap_record(&curve(a), &table);
        rows.push((name, s0(&rec, 100_000).unwrap(), s3(&rec, 100_000).unwrap(), s6(&rec, &BigUint::from(n), 2.0).unwrap()));
    }
    let elapsed = t.elapsed();
    let fmt = || rows.iter().map(|r| format!("{} S0={:.3} S3={:.3} S6={:.3}", r.0, r.1, r.2, r.3)).collect::<Vec<_>>().join("; ");
    for w in rows.windows(2) {
        ensure(w[1].1 < w[0].1 && w[1].2 > w[0].2 && w[1].3 > w[0].3, || format!("not separated: {}", fmt()))?;
    }
    for (rank, r) in rows.iter().enumerate() {
        ensure(r.3 >= rank as f64 - 0.2, || format!("{} S6(2) = {} below rank - 0.2", r.0, r.3))?;
    }
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(fmt())
}

fn a5_s6_stability() -> Outcome {
    let table = Arc::new(sieve_primes(1000));
    let mut worst: f64 = 0.0;
    for (_, a, n) in canonical() {
        let rec = ap_record(&curve(a), &table);
        let n = BigUint::from(n);
        for delta in [0.5, 1.0] {
            let step = 0.5 / delta;
            let d = (s6_with_step(&rec, &n, delta, step).unwrap() - s6_with_step(&rec, &n, delta, step / 2.0).unwrap()).abs();
            ensure(d < 1e-8, || format!("delta {delta}: halving the step moved S6 by {d}"))?;
            worst = worst.max(d);
        }
        match s6(&rec, &n, 2.0) {
            Err(Error::InsufficientApData { .. }) => {}
            other => return Err(format!("delta 2 at B = 1000 gave {other:?}")),
        }
    }
    Ok(format!("largest change under step halving {worst:.1e}; delta 2 refused at B = 1000"))
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 { 0.0 } else { diff / scale }
}

/// Largest relative error over the input and parameter gradients of `<r, layer(x)>`.
fn layer_grad_error(layer: &Layer, x: &Tensor, rng: &mut ChaCha8Rng) -> f64 {
    const H: f64 = 1e-5;
    let f = |l: &Layer, x: &Tensor, r: &Tensor| -> f64 {
        let y = l.clone().forward(x, Mode::Train, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
    };
    let mut l = layer.clone();
    let y = l.forward(x, Mode::Train, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let r = random_tensor(y.shape(), rng);
    let gx = l.backward(&r).unwrap();
    let num: Vec<f64> = (0..x.len())
        .map(|i| {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp.data_mut()[i] += H;
            xm.data_mut()[i] -= H;
            (f(layer, &xp, &r) - f(layer, &xm, &r)) / (2.0 * H)
        })
        .collect();
    let mut worst = rel_err(gx.data(), &num);
    let analytic: Vec<Vec<f64>> = l.params_mut().iter().map(|p| p.grad.clone()).collect();
    for (pi, ga) in analytic.iter().enumerate() {
        let num: Vec<f64> = (0..ga.len())
            .map(|j| {
                let (mut lp, mut lm) = (layer.clone(), layer.clone());
                lp.params_mut()[pi].value[j] += H;
                lm.params_mut()[pi].value[j] -= H;
                (f(&lp, x, &r) - f(&lm, x, &r)) / (2.0 * H)
            })
            .collect();
        worst = worst.max(rel_err(ga, &num));
    }
    worst
}

fn a6_gradients() -> Outcome {
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |k: &'static str, e: f64| {
        let w = worst.entry(k).or_default();
        *w = w.max(e);
    };
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for stride in [1, 2] {
            let ks = [1, 3, 5][seed as usize % 3];
            let len = rng.gen_range(1..12);
            let layer = Layer::Conv1d(Conv1d::new(2, 3, ks, stride, &mut rng));
            let x = random_tensor(&[2, 2, len], &mut rng);
            note(if stride == 1 { "conv s1" } else { "conv s2" }, layer_grad_error(&layer, &x, &mut rng));
        }

        let mut bn = BatchNorm1d::new(3);
        bn.gamma.value = (0..3).map(|_| rng.gen_range(0.5..1.5)).collect();
        bn.beta.value = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let shape: &[usize] = if seed % 2 == 0 { &[4, 3, 5] } else { &[6, 3] };
        let x = random_tensor(shape, &mut rng);
        note("batchnorm", layer_grad_error(&Layer::BatchNorm1d(bn), &x, &mut rng));

        let layer = Layer::Dense(Dense::new(5, 4, &mut rng));
        let x = random_tensor(&[3, 5], &mut rng);
        note("dense", layer_grad_error(&layer, &x, &mut rng));

        let logits = random_tensor(&[5, 3], &mut rng);
        let labels: Vec<usize> = (0..5).map(|_| rng.gen_range(0..3)).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..3.0)).collect();
        let (_, g) = cross_entropy_weighted(&logits, &labels, &w).unwrap();
        let num: Vec<f64> = (0..logits.len())
            .map(|i| {
                let (mut p, mut m) = (logits.clone(), logits.clone());
                p.data_mut()[i] += 1e-5;
                m.data_mut()[i] -= 1e-5;
                (cross_entropy_weighted(&p, &labels, &w).unwrap().0 - cross_entropy_weighted(&m, &labels, &w).unwrap().0) / 2e-5
            })
            .collect();
        note("softmax cross entropy", rel_err(g.data(), &num));
    }
    let summary = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect::<Vec<_>>().join(", ");
    ensure(worst.values().all(|&e| e < 1e-6), || format!("relative error too large: {summary}"))?;
    Ok(summary)
}

fn a7_architecture() -> Outcome {
    let mut out = Vec::new();
    for (pi, l2) in [(168usize, 8usize), (1229, 11), (9592, 14)] {
        let cfg = CnnConfig::for_input(pi, 4);
        ensure(cfg.l2 == l2, || format!("pi = {pi}: default L2 {} instead of {l2}", cfg.l2))?;
        let len = (0..cfg.l2).fold(pi, |l, _| conv_out_len(l, cfg.ks, 2));
        ensure(len == 1, || format!("pi = {pi}: reduced length {len}"))?;
        let mut m = build_cnn(&cfg, 0).unwrap();
        let x = random_tensor(&[1, 3, pi], &mut ChaCha8Rng::seed_from_u64(0));
        let shape = m.predict_logits(&x).unwrap().shape().to_vec();
        ensure(shape == [1, 4], || format!("pi = {pi}: logits shape {shape:?}"))?;
        out.push(format!("{pi} -> L2 = {l2}"));
    }
    Ok(out.join(", "))
}

fn a8_metric() -> Outcome {
    let mut n = 0;
    for tp in 0..=20u64 {
        for tn in 0..=20 {
            for fp in 0..=20 {
                for fn_ in 0..=20 {
                    let (a, b) = (rk_statistic(&[vec![tn, fp], vec![fn_, tp]]), binary_mcc(tp, tn, fp, fn_));
                    ensure((a - b).abs() <= 1e-12, || format!("tp {tp} tn {tn} fp {fp} fn {fn_}: {a} vs {b}"))?;
                    n += 1;
                }
            }
        }
    }
    let perfect = vec![vec![5, 0, 0], vec![0, 7, 0], vec![0, 0, 2]];
    ensure(rk_statistic(&perfect) == 1.0, || "perfect classification is not 1".into())?;
    let one_class = vec![vec![5, 0, 0], vec![7, 0, 0], vec![2, 0, 0]];
    ensure(rk_statistic(&one_class) == 0.0, || "single predicted class is not 0".into())?;
    Ok(format!("{n} binary tables agree; perfect = 1, one class = 0"))
}

/// 4 classes; row 1 is a class-dependent level plus uniform noise.
fn toy_data(n: usize, cols: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n * 3 * cols);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(0..4usize);
        let level = 0.3 * (1.5 - k as f64);
        x.extend((0..cols).map(|_| (level + rng.gen_range(-1.0..1.0f64)).clamp(-2.0, 2.0)));
        let c: f64 = rng.gen_range(0.0..1.0);
        x.extend(std::iter::repeat(c).take(cols));
        x.extend((1..=cols).map(|i| -1.0 + 2.0 * i as f64 / cols as f64));
        y.push(k);
    }
    (x, y)
}

fn fit_and_score(model: &mut Model, x: Tensor, y: Vec<usize>, cfg: &TrainConfig) -> Result<f64, String> {
    let all = Samples::new(x, y).map_err(|e| e.to_string())?;
    let idx: Vec<usize> = (0..all.len()).collect();
    let (tr, rest) = idx.split_at(all.len() * 8 / 10);
    let (va, te) = rest.split_at(rest.len() / 2);
    let (tr, va, te) = (all.subset(tr), all.subset(va), all.subset(te));
    train(model, &tr, &va, cfg).map_err(|e| e.to_string())?;
    let pred = model.predict(&te.x).map_err(|e| e.to_string())?;
    Ok(confusion_and_mcc(&pred, &te.y, 4).mcc)
}

fn a9_toy_learning() -> Outcome {
    let (n, cols) = (10_000, 168);
    let (x, y) = toy_data(n, cols, 9);
    let cfg = TrainConfig { epochs: 5, batch_size: 128, lr_max: 3e-3, seed: 9, ..TrainConfig::default() };

    let t = Instant::now();
    let mut cnn = build_cnn(&CnnConfig::for_input(cols, 4), 9).unwrap();
    let cnn_mcc = fit_and_score(&mut cnn, Tensor::new(vec![n, 3, cols], x.clone()).unwrap(), y.clone(), &cfg)?;
    let cnn_time = t.elapsed();

    // two features: the row-1 mean and the conductor value
    let two: Vec<f64> = x
        .chunks(3 * cols)
        .flat_map(|s| [s[..cols].iter().sum::<f64>() / cols as f64, s[cols]])
        .collect();
    let two = Tensor::new(vec![n, 2], two).unwrap();
    let mut fcnn = build_fcnn(2, 4, 0.0, 9).unwrap();
    let train_rows: Vec<usize> = (0..n * 8 / 10).collect();
    let st = Standardize::fit(&Samples::new(two.clone(), y.clone()).unwrap().subset(&train_rows).x).unwrap();
    fcnn.set_standardization(st).unwrap();
    let fcnn_mcc = fit_and_score(&mut fcnn, two, y, &cfg)?;

    let msg = format!("CNN MCC {cnn_mcc:.4} in {:.0}s, FCNN MCC {fcnn_mcc:.4}", cnn_time.as_secs_f64());
    ensure(cnn_mcc >= 0.95 && fcnn_mcc >= 0.95, || msg.clone())?;
    ensure(cnn_time < Duration::from_secs(900), || format!("{msg}: CNN too slow"))?;
    Ok(msg)
}

fn ecrank(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ecrank"))
        .current_dir(dir)
        .env_remove("ECRANK_DATA_DIR")
        .env("RUST_LOG", "warn")
        .args(["--threads", "1"])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("ecrank {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
}

fn mcc_of(path: &Path) -> Result<f64, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v["mcc"].as_f64().ok_or_else(|| format!("{}: no mcc", path.display()))
}

fn a10_curves() -> PathBuf {
    match std::env::var_os("ECRANK_A10_CURVES") {
        Some(p) => PathBuf::from(p),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/curves_n1e6.csv"),
    }
}

fn a10_end_to_end() -> Outcome {
    let src = a10_curves();
    ensure(src.is_file(), || format!("labeled slice {} not found", src.display()))?;
    let mut rdr = csv::Reader::from_path(&src).map_err(|e| e.to_string())?;
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let n: u64 = rec[6].parse().map_err(|_| format!("bad conductor {}", &rec[6]))?;
        ensure(n < 1_000_000, || format!("conductor {n} is not below 10^6"))?;
        rows += 1;
    }
    ensure(rows >= 20_000, || format!("only {rows} labeled curves"))?;

    let t = Instant::now();
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::copy(&src, d.join("c.csv")).unwrap();
    ecrank(d, &["aps", "--curves", "c.csv", "--bound", "10000"])?;
    let common = ["--max-rank", "3", "--seed", "1"];
    let mut mcc = BTreeMap::new();
    for b in ["1000", "10000"] {
        let sums = format!("s{b}.csv");
        ecrank(d, &["sums", "--curves", "c.csv", "--aps", "aps.bin", "--bound", b, "--out", &sums])?;
        let out = format!("fcnn{b}");
        let args = ["train", "--arch", "fcnn", "--sums", &sums, "--features", "s0", "--epochs", "30", "--batch-size", "256"];
        ecrank(d, &[&args[..], &common, &["--out-dir", &out]].concat())?;
        mcc.insert(format!("fcnn {b}"), mcc_of(&d.join(&out).join("metrics.json"))?);
    }
    for (b, epochs) in [("1000", "10"), ("10000", "6")] {
        let out = format!("cnn{b}");
        let args = ["train", "--arch", "cnn", "--curves", "c.csv", "--aps", "aps.bin", "--bound", b, "--epochs", epochs, "--batch-size", "128"];
        ecrank(d, &[&args[..], &common, &["--out-dir", &out]].concat())?;
        mcc.insert(format!("cnn {b}"), mcc_of(&d.join(&out).join("metrics.json"))?);
    }
    let elapsed = t.elapsed();
    let msg = format!(
        "{rows} curves, {:.0} min; {}",
        elapsed.as_secs_f64() / 60.0,
        mcc.iter().map(|(k, v)| format!("{k}: {v:.4}")).collect::<Vec<_>>().join(", ")
    );
    for arch in ["fcnn", "cnn"] {
        let (lo, hi) = (mcc[&format!("{arch} 1000")], mcc[&format!("{arch} 10000")]);
        ensure(lo > 0.3, || format!("{msg}: {arch} at p < 10^3 not above 0.3"))?;
        ensure(hi >= lo, || format!("{msg}: {arch} MCC drops from p < 10^3 to p < 10^4"))?;
    }
    ensure(elapsed < Duration::from_secs(7200), || format!("{msg}: over two hours"))?;
    Ok(msg)
}

fn a11_determinism() -> Outcome {
    let labeled = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/labeled.csv");
    let run = |d: &Path| -> Result<(), String> {
        std::fs::copy(&labeled, d.join("l.csv")).unwrap();
        ecrank(d, &["gen", "--count", "100", "--pencil", "3:1,5:1", "--coord-bound", "3", "--seed", "5", "--out", "gen.csv"])?;
        ecrank(d, &["aps", "--curves", "gen.csv", "--out", "gen.bin"])?;
        ecrank(d, &["aps", "--curves", "l.csv", "--out", "l.bin"])?;
        ecrank(d, &["sums", "--curves", "l.csv", "--aps", "l.bin", "--out", "l_sums.csv"])?;
        ecrank(d, &["train", "--arch", "fcnn", "--sums", "l_sums.csv", "--epochs", "5", "--batch-size", "32", "--out-dir", "fcnn"])?;
        ecrank(d, &["train", "--arch", "cnn", "--curves", "l.csv", "--aps", "l.bin", "--epochs", "2", "--batch-size", "64", "--out-dir", "cnn"])?;
        ecrank(d, &["eval", "--model", "cnn/model.bin", "--curves", "l.csv", "--aps", "l.bin", "--out", "eval.json"])?;
        ecrank(d, &["cutoffs", "--model", "fcnn/model.bin", "--out", "cutoffs.csv"])?;
        ecrank(d, &["search", "--arch", "fcnn", "--sums", "l_sums.csv", "--epochs", "2", "--trials", "2", "--out-dir", "search"])
    };
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    run(a.path())?;
    run(b.path())?;
    let files = [
        "gen.csv", "gen.bin", "l.bin", "l_sums.csv", "fcnn/model.bin", "fcnn/history.csv", "fcnn/metrics.json",
        "cnn/model.bin", "cnn/history.csv", "cnn/metrics.json", "eval.json", "cutoffs.csv", "search/search.csv",
    ];
    for f in files {
        let (x, y) = (std::fs::read(a.path().join(f)), std::fs::read(b.path().join(f)));
        let x = x.map_err(|e| format!("{f}: {e}"))?;
        ensure(Ok(&x) == y.as_ref().map_err(|_| ()), || format!("{f} differs between runs"))?;
    }
    Ok(format!("{} outputs byte-identical across two runs", files.len()))
}
