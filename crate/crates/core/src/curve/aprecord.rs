use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_u64, PrimeTable};
use crate::error::{Error, Result};

use super::count::{local_ap, QrTable};
use super::local::ReductionType;
use super::weierstrass::WeierstrassCurve;

/// a_p and the reduction type for every prime below `bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApRecord {
    pub id: String,
    pub ap: Vec<i32>,
    pub reduction: Vec<ReductionType>,
    #[serde(skip, default = "empty_table")]
    table: Arc<PrimeTable>,
}

fn empty_table() -> Arc<PrimeTable> {
    Arc::new(PrimeTable::new(2))
}

impl ApRecord {
    pub fn new(id: impl Into<String>, table: Arc<PrimeTable>, ap: Vec<i32>, reduction: Vec<ReductionType>) -> Result<Self> {
        let id = id.into();
        if ap.len() != table.len() || reduction.len() != table.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} primes below {}, got {} a_p and {} reduction types",
                table.len(),
                table.bound(),
                ap.len(),
                reduction.len()
            )));
        }
        for ((&p, &a), &r) in table.primes().iter().zip(&ap).zip(&reduction) {
            let ok = match r.bad_ap() {
                Some(expected) => a == expected,
                None => (a as i64 * a as i64) <= 4 * p as i64,
            };
            if !ok {
                return Err(Error::Validation {
                    id: id.clone(),
                    msg: format!("a_{p} = {a} inconsistent with {r:?}"),
                });
            }
        }
        Ok(Self { id, ap, reduction, table })
    }

    /// Exclusive upper bound on the primes covered.
    pub fn bound(&self) -> u64 {
        self.table.bound()
    }

    pub fn primes(&self) -> &[u64] {
        self.table.primes()
    }

    pub fn table(&self) -> &Arc<PrimeTable> {
        &self.table
    }

    /// `(p, a_p, reduction)` in ascending order of p.
    pub fn iter(&self) -> impl Iterator<Item = (u64, i32, ReductionType)> + '_ {
        self.table
            .primes()
            .iter()
            .zip(&self.ap)
            .zip(&self.reduction)
            .map(|((&p, &a), &r)| (p, a, r))
    }

    /// Entries with `p < limit`.
    pub fn iter_below(&self, limit: u64) -> impl Iterator<Item = (u64, i32, ReductionType)> + '_ {
        self.iter().take_while(move |&(p, _, _)| p < limit)
    }

    /// Fails unless every prime `<= x` is present.
    pub fn require_primes_up_to(&self, x: u64) -> Result<()> {
        let b = self.bound();
        if x < b || (b..=x).all(|n| !is_prime_u64(n)) {
            Ok(())
        } else {
            Err(Error::InsufficientApData { required: x, available: b })
        }
    }
}

/// Records for one curve; the single-curve path is a batch of one.
pub fn ap_record(curve: &WeierstrassCurve, table: &Arc<PrimeTable>) -> ApRecord {
    ap_batch(std::slice::from_ref(curve), table).pop().unwrap().expect("local analysis is infallible")
}

const CHUNK: usize = 32;

/// a_p data for many curves at once.
///
/// Primes form the outer loop so that each quadratic-character table is
/// built once per chunk of curves. Chunks run in parallel; output order
/// always matches input order.
pub fn ap_batch(curves: &[WeierstrassCurve], table: &Arc<PrimeTable>) -> Vec<Result<ApRecord>> {
    curves
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| batch_chunk(chunk, table))
        .collect()
}

fn batch_chunk(chunk: &[WeierstrassCurve], table: &Arc<PrimeTable>) -> Vec<Result<ApRecord>> {
    let n = table.len();
    let mut aps = vec![Vec::with_capacity(n); chunk.len()];
    let mut reds = vec![Vec::with_capacity(n); chunk.len()];
    for &p in table.primes() {
        let qr = (p > 2).then(|| QrTable::new(p));
        for (i, curve) in chunk.iter().enumerate() {
            let (r, a) = local_ap(curve, p, qr.as_ref());
            aps[i].push(a);
            reds[i].push(r);
        }
    }
    aps.into_iter()
        .zip(reds)
        .map(|(ap, red)| ApRecord::new(String::new(), Arc::clone(table), ap, red))
        .collect()
}
