use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ecrank_core::dataset::{class_weights, split_by_conductor, DatasetSplit, SplitMode, SplitSpec};
use ecrank_core::nn::{
    best_trial, build_cnn, build_fcnn, default_l2, evaluate, extract_cutoffs, random_search, train, write_cutoffs_csv,
    Arch, CnnConfig, History, Metrics, Model, Samples, SearchSpace, Standardize, TrainConfig, Trial, CNN_CHANNELS,
};
use log::info;
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::cli::{CutoffsArgs, EvalArgs, SearchArgs, TrainOpts};
use crate::config::{input_path, output_path, parse_grid, usage, Settings};
use crate::data::{check_bound, labels, load_dataset, Dataset, FeatureSpec, Inputs, LabelMode, LoadOptions};

/// Everything `train` needs, after flags and config are merged.
#[derive(Clone, Debug)]
pub struct TrainPlan {
    pub features: FeatureSpec,
    pub curves: Option<PathBuf>,
    pub aps: Option<PathBuf>,
    pub sums: Option<PathBuf>,
    pub load: LoadOptions,
    pub label_mode: LabelMode,
    pub threshold: u32,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub use_class_weights: bool,
    pub dropout: f64,
    pub l1: usize,
    pub l2: Option<usize>,
    pub l3: usize,
    pub ks: usize,
    pub out_dir: PathBuf,
}

fn parse_big(key: &str, v: Option<String>) -> Result<Option<BigUint>> {
    v.map(|s| s.trim().parse().map_err(|_| usage(format!("{key} `{s}` is not a positive integer")))).transpose()
}

fn opt_input(p: Option<PathBuf>) -> Result<Option<PathBuf>> {
    p.map(|p| input_path(&p)).transpose()
}

impl TrainPlan {
    pub fn resolve(o: &TrainOpts, s: &Settings) -> Result<Self> {
        let arch: String = s.or("arch", o.arch.clone(), "fcnn".into())?;
        let features_flag: Option<String> = s.get("features", o.features.clone())?;
        let bound = s.or("bound", o.bound, 1000u64)?;
        let features = match arch.as_str() {
            "cnn" => {
                check_bound(bound)?;
                FeatureSpec::Cnn { bound }
            }
            "fcnn" => FeatureSpec::parse_sums(features_flag.as_deref().unwrap_or("s0"))?,
            "omega" => {
                if features_flag.as_deref().is_some_and(|f| f != "omega") {
                    return Err(usage("--arch omega always uses all seven sums"));
                }
                FeatureSpec::parse_sums("omega")?
            }
            a => return Err(usage(format!("arch `{a}` is not cnn|fcnn|omega"))),
        };
        let (curves, aps, sums) = (
            opt_input(s.get("curves", o.curves.clone())?)?,
            opt_input(s.get("aps", o.aps.clone())?)?,
            opt_input(s.get("sums", o.sums.clone())?)?,
        );
        let load = LoadOptions {
            n_max: parse_big("n_max", s.get("n_max", o.n_max.clone())?)?,
            max_rank: s.get("max_rank", o.max_rank)?,
        };
        let label_mode = s.or("labels", o.labels.as_deref().map(|v| v.parse()).transpose().map_err(usage)?, LabelMode::All)?;
        let threshold = s.or("threshold", o.threshold, 4u32)?;
        let seed = s.or("seed", o.seed, 0u64)?;
        let mode = match s.or("split", o.split.clone(), "uniform".to_string())?.as_str() {
            "uniform" => {
                let f = s.or("test_fraction", o.test_fraction, 0.2f64)?;
                if !(f > 0.0 && f < 1.0) {
                    return Err(usage(format!("test fraction {f} outside (0, 1)")));
                }
                SplitMode::Uniform { test_fraction: f }
            }
            "top-range" => {
                let lo = parse_big("cut_lo", s.get("cut_lo", o.cut_lo.clone())?)?;
                let hi = parse_big("cut_hi", s.get("cut_hi", o.cut_hi.clone())?)?;
                match (lo, hi) {
                    (Some(lo), Some(hi)) if lo < hi => SplitMode::TopRange { lo, hi },
                    _ => return Err(usage("top-range split needs --cut-lo < --cut-hi")),
                }
            }
            m => return Err(usage(format!("split `{m}` is not uniform|top-range"))),
        };
        let split = SplitSpec { mode, seed: s.or("split_seed", o.split_seed, seed)?, ..SplitSpec::default() };
        let d = TrainConfig::default();
        let train = TrainConfig {
            epochs: s.or("epochs", o.epochs, d.epochs)?,
            batch_size: s.or("batch_size", o.batch_size, d.batch_size)?,
            lr_max: s.or("lr_max", o.lr_max, d.lr_max)?,
            beta1: s.or("beta1", o.beta1, d.beta1)?,
            cycle_momentum: s.or("cycle_momentum", o.cycle_momentum, d.cycle_momentum)?,
            weight_decay: s.or("weight_decay", o.weight_decay, d.weight_decay)?,
            pct_start: s.or("pct_start", o.pct_start, d.pct_start)?,
            seed,
            ..d
        };
        if train.epochs == 0 || train.batch_size == 0 || !(train.lr_max > 0.0) {
            return Err(usage("epochs, batch size and lr_max must be positive"));
        }
        let dropout = s.or("dropout", o.dropout, 0.0f64)?;
        Ok(Self {
            features,
            curves,
            aps,
            sums,
            load,
            label_mode,
            threshold,
            split,
            train,
            use_class_weights: s.or("class_weights", o.class_weights, true)?,
            dropout,
            l1: s.or("l1", o.l1, 0usize)?,
            l2: s.get("l2", o.l2)?,
            l3: s.or("l3", o.l3, 3usize)?,
            ks: s.or("ks", o.ks, 17usize)?,
            out_dir: s.or("out_dir", o.out_dir.clone(), PathBuf::from("."))?,
        })
    }

    fn inputs(&self) -> Inputs<'_> {
        Inputs { curves: self.curves.as_deref(), aps: self.aps.as_deref(), sums: self.sums.as_deref() }
    }
}

/// Loaded data with labels, split and class weights fixed.
pub struct Prepared {
    pub data: Dataset,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub split: DatasetSplit,
    pub train: Samples,
    pub val: Samples,
    pub test: Samples,
    pub weights: Vec<f64>,
}

fn num_classes(labels: &[usize], mode: LabelMode, max_rank: Option<u32>) -> usize {
    match mode {
        LabelMode::Binary => 2,
        LabelMode::All => {
            let seen = labels.iter().copied().max().unwrap_or(0) + 1;
            max_rank.map_or(seen, |m| seen.max(m as usize + 1)).max(2)
        }
    }
}

pub fn prepare(plan: &TrainPlan) -> Result<Prepared> {
    let data = load_dataset(&plan.features, &plan.inputs(), &plan.load)?;
    let labels = labels(&data.ranks, plan.label_mode, plan.threshold);
    let k = num_classes(&labels, plan.label_mode, plan.load.max_rank);
    let conductors: Vec<&BigUint> = data.conductors.iter().collect();
    let split = split_by_conductor(&conductors, &plan.split)?;
    let (a, b, c) = split.sizes();
    info!("{} curves, {k} classes; split {a}/{b}/{c}", data.len());
    let train = data.samples(&split.train, &labels)?;
    let val = data.samples(&split.val, &labels)?;
    let test = data.samples(&split.test, &labels)?;
    let weights = if plan.use_class_weights { class_weights(&train.y, k)? } else { vec![1.0; k] };
    Ok(Prepared { data, labels, num_classes: k, split, train, val, test, weights })
}

fn split_meta(spec: &SplitSpec) -> Vec<(&'static str, String)> {
    let mut m = vec![("split_seed", spec.seed.to_string())];
    match &spec.mode {
        SplitMode::Uniform { test_fraction } => {
            m.push(("split", "uniform".into()));
            m.push(("test_fraction", format!("{test_fraction:?}")));
        }
        SplitMode::TopRange { lo, hi } => {
            m.push(("split", "top-range".into()));
            m.push(("cut_lo", lo.to_string()));
            m.push(("cut_hi", hi.to_string()));
        }
    }
    m
}

fn split_from_meta(model: &Model) -> Result<SplitSpec> {
    let get = |k: &str| model.meta.get(k).ok_or_else(|| usage(format!("model lacks `{k}` metadata")));
    let bad = |k: &str| usage(format!("model metadata `{k}` is malformed"));
    let mode = match get("split")?.as_str() {
        "uniform" => SplitMode::Uniform { test_fraction: get("test_fraction")?.parse().map_err(|_| bad("test_fraction"))? },
        "top-range" => SplitMode::TopRange {
            lo: get("cut_lo")?.parse().map_err(|_| bad("cut_lo"))?,
            hi: get("cut_hi")?.parse().map_err(|_| bad("cut_hi"))?,
        },
        _ => return Err(bad("split")),
    };
    Ok(SplitSpec { mode, seed: get("split_seed")?.parse().map_err(|_| bad("split_seed"))?, ..SplitSpec::default() })
}

/// Builds and trains a fresh model on prepared data.
pub fn fit(plan: &TrainPlan, p: &Prepared) -> Result<(Model, History)> {
    let k = p.num_classes;
    let mut model = match &plan.features {
        FeatureSpec::Cnn { .. } => {
            let len = p.data.item_shape[1];
            let cfg = CnnConfig {
                l1: plan.l1,
                l2: plan.l2.unwrap_or_else(|| default_l2(len)),
                l3: plan.l3,
                ks: plan.ks,
                channels: CNN_CHANNELS,
                input_len: len,
                num_classes: k,
            };
            build_cnn(&cfg, plan.train.seed).map_err(|e| usage(e.to_string()))?
        }
        FeatureSpec::Sums(_) => {
            let mut m = build_fcnn(p.data.item_shape[0], k, plan.dropout, plan.train.seed)
                .map_err(|e| usage(e.to_string()))?;
            m.set_standardization(Standardize::fit(&p.train.x)?)?;
            m
        }
    };
    let meta = &mut model.meta;
    meta.insert("features".into(), plan.features.describe());
    meta.insert("n_max".into(), p.data.n_max.to_string());
    meta.insert("labels".into(), plan.label_mode.name().into());
    meta.insert("threshold".into(), plan.threshold.to_string());
    if let Some(m) = plan.load.max_rank {
        meta.insert("max_rank".into(), m.to_string());
    }
    for (k, v) in split_meta(&plan.split) {
        meta.insert(k.into(), v);
    }
    let cfg = TrainConfig { class_weights: Some(p.weights.clone()), ..plan.train.clone() };
    let history = train(&mut model, &p.train, &p.val, &cfg)?;
    Ok((model, history))
}

/// Test metrics for `metrics.json`: the full confusion matrix and the
/// two-class view obtained by merging labels at the threshold.
pub fn metrics_json(model: &Model, data: &Samples, label_mode: LabelMode, threshold: u32) -> Result<Value> {
    let k = model.num_classes();
    let mut m = model.clone();
    let (loss, metrics) = evaluate(&mut m, data, &vec![1.0; k])?;
    let binary: Metrics = match label_mode {
        LabelMode::All => metrics.merged(threshold as usize),
        LabelMode::Binary => metrics.clone(),
    };
    let mut counts = vec![0u64; k];
    data.y.iter().for_each(|&y| counts[y] += 1);
    let arch = match &model.arch {
        Arch::Cnn(_) => "cnn",
        Arch::Fcnn { .. } => "fcnn",
    };
    Ok(json!({
        "arch": arch,
        "features": model.meta.get("features"),
        "labels": label_mode.name(),
        "num_classes": k,
        "samples": data.len(),
        "class_counts": counts,
        "loss": loss,
        "mcc": metrics.mcc,
        "accuracy": metrics.accuracy,
        "confusion": metrics.confusion,
        "binary": {
            "threshold": threshold,
            "mcc": binary.mcc,
            "accuracy": binary.accuracy,
            "confusion": binary.confusion,
        },
    }))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn cmd_train(o: &TrainOpts) -> Result<()> {
    let s = Settings::load(o.config.as_deref())?;
    let plan = TrainPlan::resolve(o, &s)?;
    s.finish()?;
    let p = prepare(&plan)?;
    let (model, history) = fit(&plan, &p)?;
    let metrics = metrics_json(&model, &p.test, plan.label_mode, plan.threshold)?;
    let dir = &plan.out_dir;
    model.save(&output_path(&dir.join("model.bin"))?)?;
    let hist = output_path(&dir.join("history.csv"))?;
    history.write_csv(BufWriter::new(File::create(&hist)?))?;
    write_json(&output_path(&dir.join("metrics.json"))?, &metrics)?;
    info!("test MCC {:.4} (binary {:.4})", metrics["mcc"].as_f64().unwrap_or(f64::NAN), metrics["binary"]["mcc"].as_f64().unwrap_or(f64::NAN));
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let s = Settings::load(a.config.as_deref())?;
    let model_path = input_path(&s.required::<PathBuf>("model", a.model.clone())?)?;
    let curves = opt_input(s.get("curves", a.curves.clone())?)?;
    let aps = opt_input(s.get("aps", a.aps.clone())?)?;
    let sums = opt_input(s.get("sums", a.sums.clone())?)?;
    let features_flag: Option<String> = s.get("features", a.features.clone())?;
    let bound: Option<u64> = s.get("bound", a.bound)?;
    let subset = s.or("subset", a.subset.clone(), "all".to_string())?;
    let out = s.or("out", a.out.clone(), PathBuf::from("metrics.json"))?;
    s.finish()?;

    let model = Model::load(&model_path)?;
    let meta = |k: &str| model.meta.get(k).cloned().ok_or_else(|| usage(format!("model lacks `{k}` metadata")));
    let mut features = FeatureSpec::parse_description(&meta("features")?)?;
    if let Some(f) = features_flag {
        features = FeatureSpec::parse_sums(&f)?;
    }
    if let (Some(b), FeatureSpec::Cnn { bound }) = (bound, &mut features) {
        check_bound(b)?;
        *bound = b;
    }
    let label_mode: LabelMode = meta("labels")?.parse().map_err(usage)?;
    let threshold: u32 = meta("threshold")?.parse().map_err(|_| usage("bad threshold metadata"))?;
    let k = model.num_classes();
    let max_rank = match (model.meta.get("max_rank"), label_mode) {
        (Some(m), _) => Some(m.parse().map_err(|_| usage("bad max_rank metadata"))?),
        (None, LabelMode::All) => Some(k as u32 - 1),
        (None, LabelMode::Binary) => None,
    };
    let load = LoadOptions { n_max: Some(meta("n_max")?.parse().map_err(|_| usage("bad n_max metadata"))?), max_rank };
    let inputs = Inputs { curves: curves.as_deref(), aps: aps.as_deref(), sums: sums.as_deref() };
    let data = load_dataset(&features, &inputs, &load)?;
    let y = labels(&data.ranks, label_mode, threshold);
    let idx: Vec<usize> = match subset.as_str() {
        "all" => (0..data.len()).collect(),
        "test" => {
            let conductors: Vec<&BigUint> = data.conductors.iter().collect();
            split_by_conductor(&conductors, &split_from_meta(&model)?)?.test
        }
        o => return Err(usage(format!("subset `{o}` is not all|test"))),
    };
    let samples = data.samples(&idx, &y)?;
    model.check_input(&samples.x)?;
    let metrics = metrics_json(&model, &samples, label_mode, threshold)?;
    write_json(&output_path(&out)?, &metrics)?;
    info!("MCC {:.4} on {} curves", metrics["mcc"].as_f64().unwrap_or(f64::NAN), samples.len());
    Ok(())
}

pub fn cmd_cutoffs(a: &CutoffsArgs) -> Result<()> {
    let s = Settings::load(a.config.as_deref())?;
    let model_path = input_path(&s.required::<PathBuf>("model", a.model.clone())?)?;
    let conductors: Option<String> = s.get("conductors", a.conductors.clone())?;
    let sum_grid = s.or("sum_grid", a.sum_grid.clone(), "-10:10:401".to_string())?;
    let out = s.or("out", a.out.clone(), PathBuf::from("cutoffs.csv"))?;
    s.finish()?;
    let mut model = Model::load(&model_path)?;
    let n_max: BigUint = model
        .meta
        .get("n_max")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| usage("model lacks `n_max` metadata"))?;
    let log10_n_max = n_max.to_string().parse::<f64>().map_or(f64::NAN, f64::log10);
    let conductors = conductors.unwrap_or_else(|| format!("0:{log10_n_max}:11"));
    let rows = extract_cutoffs(&mut model, &parse_grid(&conductors)?, &parse_grid(&sum_grid)?, log10_n_max)?;
    let path = output_path(&out)?;
    write_cutoffs_csv(&rows, BufWriter::new(File::create(&path)?))?;
    info!("wrote {} boundary points to {}", rows.len(), path.display());
    Ok(())
}

pub fn cmd_search(a: &SearchArgs) -> Result<()> {
    let s = Settings::load(a.opts.config.as_deref())?;
    let plan = TrainPlan::resolve(&a.opts, &s)?;
    let trials = s.or("trials", a.trials, 20usize)?;
    let search_seed = s.or("search_seed", a.search_seed, plan.train.seed)?;
    s.finish()?;
    let p = prepare(&plan)?;
    let mut failure: Option<anyhow::Error> = None;
    let results = random_search(trials, search_seed, &SearchSpace::default(), |t: &Trial| {
        if failure.is_some() {
            return Ok(f64::NAN);
        }
        let mut tp = plan.clone();
        tp.dropout = t.dropout;
        tp.train.lr_max = t.lr_max;
        tp.train.weight_decay = t.weight_decay;
        let h = match fit(&tp, &p) {
            Ok((_, h)) => h,
            Err(e) => {
                failure = Some(e);
                return Ok(f64::NAN);
            }
        };
        let score = h.records.iter().map(|r| r.val_mcc).fold(f64::NEG_INFINITY, f64::max);
        info!("trial {}: dropout {:.3} lr {:.2e} wd {:.2e} -> val MCC {score:.4}", t.index, t.dropout, t.lr_max, t.weight_decay);
        Ok(score)
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let path = output_path(&plan.out_dir.join("search.csv"))?;
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["trial", "dropout", "lr_max", "weight_decay", "val_mcc"])?;
    for t in &results {
        w.write_record([t.index.to_string(), t.dropout.to_string(), t.lr_max.to_string(), t.weight_decay.to_string(), t.score.to_string()])?;
    }
    w.flush()?;
    if let Some(b) = best_trial(&results) {
        println!("best trial {}: dropout = {} lr_max = {} weight_decay = {} (val MCC {})", b.index, b.dropout, b.lr_max, b.weight_decay, b.score);
    }
    Ok(())
}
