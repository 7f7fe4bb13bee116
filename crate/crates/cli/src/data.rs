use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{Context, Result};
use ecrank_core::arith::PrimeTable;
use ecrank_core::curve::ApRecord;
use ecrank_core::dataset::{build_feature_matrix, conductor_feature, ingest_csv, read_aps_file, IngestOptions};
use ecrank_core::nn::{Samples, Tensor};
use ecrank_core::sums::SumVector;
use ecrank_core::Error;
use log::warn;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::config::usage;

/// Feature bounds N accepted by `sums`, `train` and `eval`.
pub const SUPPORTED_BOUNDS: [u64; 3] = [1_000, 10_000, 100_000];

pub const SUMS_HEADER: [&str; 10] = ["id", "conductor", "S0", "S1", "S2", "S3", "S4", "S5", "S6", "rank"];

pub fn check_bound(b: u64) -> Result<()> {
    if !SUPPORTED_BOUNDS.contains(&b) {
        return Err(usage(format!("bound {b} is not one of {SUPPORTED_BOUNDS:?}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelMode {
    All,
    Binary,
}

impl FromStr for LabelMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" => Ok(LabelMode::All),
            "binary" => Ok(LabelMode::Binary),
            _ => Err(format!("label mode `{s}` is not all|binary")),
        }
    }
}

impl LabelMode {
    pub fn name(self) -> &'static str {
        match self {
            LabelMode::All => "all",
            LabelMode::Binary => "binary",
        }
    }
}

pub fn labels(ranks: &[u32], mode: LabelMode, threshold: u32) -> Vec<usize> {
    match mode {
        LabelMode::All => ranks.iter().map(|&r| r as usize).collect(),
        LabelMode::Binary => ranks.iter().map(|&r| usize::from(r >= threshold)).collect(),
    }
}

/// What a model reads: the CNN matrix at bound N, or chosen sums plus the
/// normalized conductor.
#[derive(Clone, Debug, PartialEq)]
pub enum FeatureSpec {
    Cnn { bound: u64 },
    Sums(Vec<usize>),
}

impl FeatureSpec {
    /// `s0`, `s0,s5`, or `omega` for all seven sums.
    pub fn parse_sums(spec: &str) -> Result<Self> {
        if spec == "omega" {
            return Ok(FeatureSpec::Sums((0..7).collect()));
        }
        let mut idx = Vec::new();
        for part in spec.split(',') {
            let i = part
                .trim()
                .strip_prefix(['s', 'S'])
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&i| i < 7)
                .ok_or_else(|| usage(format!("feature `{part}` is not one of s0..s6")))?;
            if idx.contains(&i) {
                return Err(usage(format!("feature s{i} listed twice")));
            }
            idx.push(i);
        }
        Ok(FeatureSpec::Sums(idx))
    }

    pub fn describe(&self) -> String {
        match self {
            FeatureSpec::Cnn { bound } => format!("matrix:{bound}"),
            FeatureSpec::Sums(idx) => idx.iter().map(|i| format!("s{i}")).collect::<Vec<_>>().join(","),
        }
    }

    pub fn parse_description(s: &str) -> Result<Self> {
        match s.strip_prefix("matrix:") {
            Some(b) => Ok(FeatureSpec::Cnn { bound: b.parse().map_err(|_| usage(format!("bad feature spec `{s}`")))? }),
            None => Self::parse_sums(s),
        }
    }
}

/// Input files for a dataset; which ones are needed depends on the features.
#[derive(Clone, Debug, Default)]
pub struct Inputs<'a> {
    pub curves: Option<&'a Path>,
    pub aps: Option<&'a Path>,
    pub sums: Option<&'a Path>,
}

/// One row of sums.csv.
#[derive(Clone, Debug, PartialEq)]
pub struct SumsRow {
    pub id: String,
    pub conductor: BigUint,
    pub sums: [Option<f64>; 7],
    pub rank: Option<u32>,
}

impl SumsRow {
    pub fn new(id: String, conductor: BigUint, v: &SumVector, rank: Option<u32>) -> Self {
        let mut sums: [Option<f64>; 7] = std::array::from_fn(|i| Some(v.get(i)));
        sums[6] = v.s6;
        Self { id, conductor, sums, rank }
    }
}

pub fn write_sums_csv(path: &Path, rows: &[SumsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(SUMS_HEADER)?;
    for r in rows {
        let mut rec = vec![r.id.clone(), r.conductor.to_string()];
        rec.extend(r.sums.iter().map(|s| s.map(|v| v.to_string()).unwrap_or_default()));
        rec.push(r.rank.map(|x| x.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sums_csv(path: &Path) -> Result<Vec<SumsRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != SUMS_HEADER {
        return Err(usage(format!("{}: header must be {}", path.display(), SUMS_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |what: &str| usage(format!("{}:{line}: malformed {what}", path.display()));
        let conductor: BigUint = rec[1].parse().map_err(|_| bad("conductor"))?;
        let mut sums = [None; 7];
        for (j, s) in sums.iter_mut().enumerate() {
            let cell = rec[2 + j].trim();
            if !cell.is_empty() {
                *s = Some(cell.parse::<f64>().map_err(|_| bad(SUMS_HEADER[2 + j]))?);
            }
        }
        let rank = match rec[9].trim() {
            "" => None,
            v => Some(v.parse().map_err(|_| bad("rank"))?),
        };
        out.push(SumsRow { id: rec[0].to_string(), conductor, sums, rank });
    }
    Ok(out)
}

/// Labeled feature rows, flattened per sample.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub conductors: Vec<BigUint>,
    pub ranks: Vec<u32>,
    pub item_shape: Vec<usize>,
    pub items: Vec<f64>,
    pub n_max: BigUint,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn samples(&self, idx: &[usize], labels: &[usize]) -> Result<Samples> {
        let width: usize = self.item_shape.iter().product();
        let mut data = Vec::with_capacity(idx.len() * width);
        for &i in idx {
            data.extend_from_slice(&self.items[i * width..(i + 1) * width]);
        }
        let mut shape = vec![idx.len()];
        shape.extend(&self.item_shape);
        Ok(Samples::new(Tensor::new(shape, data)?, idx.iter().map(|&i| labels[i]).collect())?)
    }
}

/// Options shared by every dataset load.
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// Conductor normalization; the largest conductor present when unset.
    pub n_max: Option<BigUint>,
    /// Records with a larger rank are dropped.
    pub max_rank: Option<u32>,
}

struct Row<'a> {
    id: &'a str,
    conductor: &'a BigUint,
    rank: Option<u32>,
}

fn filter_rows<'a>(rows: Vec<Row<'a>>, opts: &LoadOptions) -> Result<(Vec<Row<'a>>, BigUint)> {
    let total = rows.len();
    let labeled: Vec<Row> = rows.into_iter().filter(|r| r.rank.is_some()).collect();
    if labeled.len() < total {
        warn!("{} unlabeled records skipped", total - labeled.len());
    }
    let n = labeled.len();
    let mut kept: Vec<Row> = match opts.max_rank {
        Some(m) => labeled.into_iter().filter(|r| r.rank.unwrap() <= m).collect(),
        None => labeled,
    };
    if kept.len() < n {
        warn!("{} records above the rank limit skipped", n - kept.len());
    }
    let n_max = match &opts.n_max {
        Some(m) => m.clone(),
        None => kept.iter().map(|r| r.conductor.clone()).max().unwrap_or_default(),
    };
    let before = kept.len();
    kept.retain(|r| r.conductor <= &n_max);
    if kept.len() < before {
        warn!("{} records with conductor above {n_max} skipped", before - kept.len());
    }
    if kept.is_empty() {
        return Err(usage("no usable labeled records in the input"));
    }
    if n_max <= BigUint::from(1u8) {
        return Err(usage("conductor normalization needs a maximum above 1"));
    }
    Ok((kept, n_max))
}

fn load_matrix(inputs: &Inputs, bound: u64, opts: &LoadOptions) -> Result<Dataset> {
    let curves_path = inputs.curves.ok_or_else(|| usage("matrix features need --curves"))?;
    let aps_path = inputs.aps.ok_or_else(|| usage("matrix features need --aps"))?;
    let records = ingest_csv(curves_path, &IngestOptions::default())?;
    let aps: HashMap<String, ApRecord> = read_aps_file(aps_path)?.into_iter().map(|r| (r.id.clone(), r)).collect();
    let rows: Vec<Row> = records.iter().map(|r| Row { id: &r.id, conductor: &r.conductor, rank: r.rank }).collect();
    let (rows, n_max) = filter_rows(rows, opts)?;
    let rows: Vec<Row> = {
        let before = rows.len();
        let kept: Vec<Row> = rows.into_iter().filter(|r| aps.contains_key(r.id)).collect();
        if kept.len() < before {
            warn!("{} curves have no a_p block and were skipped", before - kept.len());
        }
        kept
    };
    if rows.is_empty() {
        return Err(usage("no curve of the input has a_p data"));
    }
    let table = Arc::new(PrimeTable::new(bound));
    let mats: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|r| build_feature_matrix(r.conductor, &aps[r.id], &table, &n_max).map(|m| m.data))
        .collect::<std::result::Result<_, Error>>()
        .map_err(|e| match e {
            Error::InsufficientApData { .. } => usage(format!("{e}; rerun `aps` with a larger bound")),
            e => e.into(),
        })?;
    Ok(Dataset {
        ids: rows.iter().map(|r| r.id.to_string()).collect(),
        conductors: rows.iter().map(|r| r.conductor.clone()).collect(),
        ranks: rows.iter().map(|r| r.rank.unwrap()).collect(),
        item_shape: vec![3, table.len()],
        items: mats.concat(),
        n_max,
    })
}

fn load_sums(inputs: &Inputs, idx: &[usize], opts: &LoadOptions) -> Result<Dataset> {
    let sums_path = inputs.sums.ok_or_else(|| usage("sum features need --sums"))?;
    let table = read_sums_csv(sums_path)?;
    let rows: Vec<Row> = table.iter().map(|r| Row { id: &r.id, conductor: &r.conductor, rank: r.rank }).collect();
    let (rows, n_max) = filter_rows(rows, opts)?;
    let by_id: HashMap<&str, &SumsRow> = table.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut items = Vec::with_capacity(rows.len() * (idx.len() + 1));
    for r in &rows {
        let s = by_id[r.id];
        for &i in idx {
            let v = s.sums[i].ok_or_else(|| usage(format!("curve {} has no S{i} value in {}", r.id, sums_path.display())))?;
            items.push(v);
        }
        items.push(conductor_feature(r.conductor, &n_max)?);
    }
    Ok(Dataset {
        ids: rows.iter().map(|r| r.id.to_string()).collect(),
        conductors: rows.iter().map(|r| r.conductor.clone()).collect(),
        ranks: rows.iter().map(|r| r.rank.unwrap()).collect(),
        item_shape: vec![idx.len() + 1],
        items,
        n_max,
    })
}

pub fn load_dataset(spec: &FeatureSpec, inputs: &Inputs, opts: &LoadOptions) -> Result<Dataset> {
    match spec {
        FeatureSpec::Cnn { bound } => load_matrix(inputs, *bound, opts),
        FeatureSpec::Sums(idx) => load_sums(inputs, idx, opts),
    }
}
