use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use ecrank_core::arith::PrimeTable;
use ecrank_core::curve::{ap_batch, ApRecord, WeierstrassCurve};
use ecrank_core::dataset::{
    generate_custom_dataset, ingest_csv, read_aps_file, write_aps, write_curves_csv, GenConfig, IngestOptions,
};
use ecrank_core::sums::{sum_vector, MAX_DELTA};
use ecrank_core::Error;
use log::{info, warn};
use rayon::prelude::*;

use crate::cli::{ApsArgs, GenArgs, SumsArgs};
use crate::config::{input_path, output_path, usage, Settings};
use crate::data::{check_bound, write_sums_csv, SumsRow};

const APS_CHUNK: usize = 2048;

/// `k:count` pairs, e.g. `3:100,6:50`.
pub fn parse_pencil(spec: &str) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || usage(format!("pencil entry `{part}` must be k:count with 2 <= k <= 8"));
        let (k, n) = part.split_once(':').ok_or_else(bad)?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if !(2..=8).contains(&k) || out.insert(k, n).is_some() {
            return Err(bad());
        }
    }
    Ok(out)
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let s = Settings::load(a.config.as_deref())?;
    let d = GenConfig::default();
    let cfg = GenConfig {
        seed: s.or("seed", a.seed, d.seed)?,
        random_count: s.or("count", a.count, 0)?,
        coeff_bound: s.or("coeff_bound", a.coeff_bound, d.coeff_bound)?,
        pencil_counts: parse_pencil(&s.or("pencil", a.pencil.clone(), String::new())?)?,
        coord_bound: s.or("coord_bound", a.coord_bound, d.coord_bound)?,
        factor_budget: s.or("factor_budget", a.factor_budget, d.factor_budget)?,
        attempts_per_curve: s.or("attempts_per_curve", a.attempts_per_curve, d.attempts_per_curve)?,
    };
    let out = s.or("out", a.out.clone(), PathBuf::from("curves.csv"))?;
    s.finish()?;
    if cfg.coeff_bound == 0 || cfg.coord_bound == 0 {
        return Err(usage("coefficient and coordinate bounds must be positive"));
    }
    let records = generate_custom_dataset(&cfg)?;
    let path = output_path(&out)?;
    write_curves_csv(&path, &records)?;
    info!("wrote {} curves to {}", records.len(), path.display());
    Ok(())
}

pub fn cmd_aps(a: &ApsArgs) -> Result<()> {
    let s = Settings::load(a.config.as_deref())?;
    let curves = input_path(&s.required::<PathBuf>("curves", a.curves.clone())?)?;
    let bound = s.or("bound", a.bound, 1000u64)?;
    let out = s.or("out", a.out.clone(), PathBuf::from("aps.bin"))?;
    s.finish()?;
    if bound < 3 || bound > u64::from(u32::MAX) {
        return Err(usage(format!("bound {bound} outside 3..2^32")));
    }
    let records = ingest_csv(&curves, &IngestOptions::default())?;
    let table = Arc::new(PrimeTable::new(bound));
    let path = output_path(&out)?;
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    let (mut ok, mut failed) = (0usize, 0usize);
    for (c, chunk) in records.chunks(APS_CHUNK).enumerate() {
        let parsed: Vec<(usize, WeierstrassCurve)> = chunk
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r.curve() {
                Ok(e) => Some((i, e)),
                Err(e) => {
                    warn!("curve {}: {e}", r.id);
                    None
                }
            })
            .collect();
        failed += chunk.len() - parsed.len();
        let curves: Vec<WeierstrassCurve> = parsed.iter().map(|(_, e)| e.clone()).collect();
        for ((i, _), res) in parsed.iter().zip(ap_batch(&curves, &table)) {
            match res {
                Ok(mut rec) => {
                    rec.id = chunk[*i].id.clone();
                    write_aps(&mut w, &rec)?;
                    ok += 1;
                }
                Err(e) => {
                    warn!("curve {}: {e}", chunk[*i].id);
                    failed += 1;
                }
            }
        }
        info!("a_p: {} / {} curves", (c * APS_CHUNK + chunk.len()).min(records.len()), records.len());
    }
    w.flush()?;
    if ok == 0 && failed > 0 {
        return Err(usage(format!("a_p computation failed for all {failed} curves")));
    }
    info!("wrote {ok} a_p blocks below {bound} to {} ({failed} failed)", path.display());
    Ok(())
}

pub fn cmd_sums(a: &SumsArgs) -> Result<()> {
    let s = Settings::load(a.config.as_deref())?;
    let curves = input_path(&s.required::<PathBuf>("curves", a.curves.clone())?)?;
    let aps = input_path(&s.required::<PathBuf>("aps", a.aps.clone())?)?;
    let bound = s.or("bound", a.bound, 1000u64)?;
    let delta = s.or("delta", a.delta, 1.0f64)?;
    let out = s.or("out", a.out.clone(), PathBuf::from("sums.csv"))?;
    s.finish()?;
    check_bound(bound)?;
    if !(delta > 0.0 && delta <= MAX_DELTA) {
        return Err(usage(format!("delta {delta} outside (0, {MAX_DELTA}]")));
    }
    let rows = compute_sums(&curves, &aps, bound, delta)?;
    let path = output_path(&out)?;
    write_sums_csv(&path, &rows)?;
    info!("wrote sums for {} curves to {}", rows.len(), path.display());
    Ok(())
}

fn compute_sums(curves: &Path, aps: &Path, bound: u64, delta: f64) -> Result<Vec<SumsRow>> {
    let records = ingest_csv(curves, &IngestOptions::default())?;
    let aps: HashMap<String, ApRecord> = read_aps_file(aps)?.into_iter().map(|r| (r.id.clone(), r)).collect();
    let missing = records.iter().filter(|r| !aps.contains_key(&r.id)).count();
    if missing > 0 {
        warn!("{missing} curves have no a_p block and were skipped");
    }
    let rows: Vec<SumsRow> = records
        .par_iter()
        .filter(|r| aps.contains_key(&r.id))
        .map(|r| {
            let v = sum_vector(&aps[&r.id], &r.conductor, bound, delta).map_err(|e| match e {
                Error::InsufficientApData { .. } => usage(format!("curve {}: {e}; rerun `aps` with a larger bound", r.id)),
                e => e.into(),
            })?;
            Ok(SumsRow::new(r.id.clone(), r.conductor.clone(), &v, r.rank))
        })
        .collect::<Result<_>>()?;
    let no_s6 = rows.iter().filter(|r| r.sums[6].is_none()).count();
    if no_s6 > 0 {
        let need = (2.0 * std::f64::consts::PI * delta).exp();
        warn!("S6 left empty for {no_s6} curves: delta {delta} needs a_p for p < {need:.0}");
    }
    Ok(rows)
}
