//! `curves.csv` and `aps.bin`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};

use crate::arith::PrimeTable;
use crate::curve::{ApRecord, ReductionType};
use crate::error::{Error, Result};

use super::CurveRecord;

pub const CSV_HEADER: [&str; 8] = ["id", "a1", "a2", "a3", "a4", "a6", "conductor", "rank"];
const CLASS_COLUMNS: [&str; 2] = ["isogeny_class", "class"];

#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    /// Keep only the first curve of each (conductor, isogeny class) pair.
    pub dedupe_isogeny: bool,
    /// Reject rank labels above this value.
    pub max_rank: Option<u32>,
}

pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<Vec<CurveRecord>> {
    let file = File::open(path)?;
    read_curves(file, path, opts)
}

pub fn read_curves<R: Read>(input: R, path: &Path, opts: &IngestOptions) -> Result<Vec<CurveRecord>> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() < CSV_HEADER.len() || headers.iter().zip(CSV_HEADER).any(|(h, w)| h != w) {
        return Err(parse_err(1, format!("header must start with {}", CSV_HEADER.join(","))));
    }
    let class_col = headers.iter().position(|h| CLASS_COLUMNS.contains(&h));
    let source = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("");
        let int = |i: usize| BigInt::from_str(field(i)).map_err(|e| parse_err(line, format!("{}: {e}", CSV_HEADER[i])));
        let ainvs = [int(1)?, int(2)?, int(3)?, int(4)?, int(5)?];
        let conductor =
            BigUint::from_str(field(6)).map_err(|e| parse_err(line, format!("conductor: {e}")))?;
        let rank = match field(7) {
            "" => None,
            r => Some(r.parse::<u32>().map_err(|e| parse_err(line, format!("rank: {e}")))?),
        };
        let mut rec = CurveRecord::new(field(0), ainvs, conductor, rank).with_source(source.clone());
        rec.isogeny_class = class_col.map(|c| field(c).to_string()).filter(|s| !s.is_empty());
        rec.validate(opts.max_rank)?;
        if opts.dedupe_isogeny {
            if let Some(class) = &rec.isogeny_class {
                if !seen.insert((rec.conductor.clone(), class.clone())) {
                    continue;
                }
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_curves_csv(path: &Path, records: &[CurveRecord]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_curves(file, records)
}

pub fn write_curves<W: Write>(out: W, records: &[CurveRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let [a1, a2, a3, a4, a6] = r.ainvs.each_ref().map(|a| a.to_string());
        let rank = r.rank.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([r.id.as_str(), &a1, &a2, &a3, &a4, &a6, &r.conductor.to_string(), &rank])?;
    }
    w.flush()?;
    Ok(())
}

/// One block: u32 id length, id bytes, u32 bound, then `(i32 a_p, u8 code)` per prime.
pub fn write_aps<W: Write>(out: &mut W, rec: &ApRecord) -> Result<()> {
    let id = rec.id.as_bytes();
    let bound = u32::try_from(rec.bound())
        .map_err(|_| Error::InvalidArgument(format!("bound {} does not fit the aps.bin format", rec.bound())))?;
    out.write_all(&(id.len() as u32).to_le_bytes())?;
    out.write_all(id)?;
    out.write_all(&bound.to_le_bytes())?;
    let mut buf = Vec::with_capacity(rec.ap.len() * 5);
    for (&a, r) in rec.ap.iter().zip(&rec.reduction) {
        buf.extend_from_slice(&a.to_le_bytes());
        buf.push(r.code());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_aps_file(path: &Path, records: &[ApRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        write_aps(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every block; prime tables are shared between records with the same bound.
pub fn read_aps<R: Read>(mut input: R) -> Result<Vec<ApRecord>> {
    let mut tables: HashMap<u64, Arc<PrimeTable>> = HashMap::new();
    let mut out = Vec::new();
    let format = |msg: String| Error::ModelFormat(format!("aps.bin: {msg}"));
    loop {
        let mut len = [0u8; 4];
        match input.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let mut id = vec![0u8; u32::from_le_bytes(len) as usize];
        input.read_exact(&mut id)?;
        let id = String::from_utf8(id).map_err(|e| format(e.to_string()))?;
        let mut b = [0u8; 4];
        input.read_exact(&mut b)?;
        let bound = u32::from_le_bytes(b) as u64;
        let table = tables.entry(bound).or_insert_with(|| Arc::new(PrimeTable::new(bound))).clone();
        let mut body = vec![0u8; table.len() * 5];
        input.read_exact(&mut body)?;
        let mut ap = Vec::with_capacity(table.len());
        let mut red = Vec::with_capacity(table.len());
        for chunk in body.chunks_exact(5) {
            ap.push(i32::from_le_bytes(chunk[..4].try_into().unwrap()));
            red.push(ReductionType::from_code(chunk[4]).ok_or_else(|| format(format!("bad reduction code {}", chunk[4])))?);
        }
        out.push(ApRecord::new(id, table, ap, red)?);
    }
    Ok(out)
}

pub fn read_aps_file(path: &Path) -> Result<Vec<ApRecord>> {
    read_aps(BufReader::new(File::open(path)?))
}
