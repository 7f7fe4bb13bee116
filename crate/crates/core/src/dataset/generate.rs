use std::collections::{BTreeMap, HashSet};

use log::{debug, warn};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, sieve_primes};
use crate::curve::{conductor, model_from_c4c6, torsion_is_trivial, WeierstrassCurve};
use crate::error::Result;

use super::cubic::{cubic_to_weierstrass, gen_pencil_cubic_with};
use super::CurveRecord;

const DEFAULT_FACTOR_BUDGET: u64 = 1 << 18;
const SMALL_PRIME_LIMIT: u64 = 1000;
const BATCH: usize = 64;
const STREAM_RANDOM: u64 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub seed: u64,
    pub random_count: usize,
    pub coeff_bound: u64,
    /// Number of pencil curves for each k in 2..=8.
    pub pencil_counts: BTreeMap<usize, usize>,
    pub coord_bound: u64,
    /// Pollard rho budget when factoring discriminants.
    pub factor_budget: u64,
    /// Candidates tried per requested curve before giving up on a stream.
    pub attempts_per_curve: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            random_count: 0,
            coeff_bound: 10_000,
            pencil_counts: BTreeMap::new(),
            coord_bound: 20,
            factor_budget: DEFAULT_FACTOR_BUDGET,
            attempts_per_curve: 50,
        }
    }
}

/// Independent generator for candidate `index` of `stream`.
fn candidate_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) << 20);
    rng
}

fn draw_weierstrass<R: Rng>(bound: i64, rng: &mut R) -> Option<WeierstrassCurve> {
    let a1 = rng.gen_range(0..=1i64);
    let a2 = rng.gen_range(-1..=1i64);
    let a3 = rng.gen_range(0..=1i64);
    let a4 = rng.gen_range(-bound..=bound);
    let a6 = rng.gen_range(-bound..=bound);
    WeierstrassCurve::from_ainvs([a1, a2, a3, a4, a6]).ok()
}

/// Random models in reduced form with conductors attached; singular draws
/// (and the rare discriminant that resists factoring) are redrawn.
pub fn gen_random_weierstrass(coeff_bound: u64, count: usize, seed: u64) -> Vec<CurveRecord> {
    let bound = coeff_bound.max(1) as i64;
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    while out.len() < count {
        let need = count - out.len();
        let batch: Vec<Option<CurveRecord>> = (index..index + need as u64)
            .into_par_iter()
            .map(|i| {
                let curve = draw_weierstrass(bound, &mut candidate_rng(seed, STREAM_RANDOM, i))?;
                let n = curve.compute_conductor(DEFAULT_FACTOR_BUDGET).ok()?;
                Some(record_for(&curve, n, "random"))
            })
            .collect();
        index += need as u64;
        out.extend(batch.into_iter().flatten());
    }
    for (i, r) in out.iter_mut().enumerate() {
        r.id = format!("w{i}");
    }
    out
}

fn record_for(curve: &WeierstrassCurve, n: BigUint, source: &str) -> CurveRecord {
    CurveRecord::new("", curve.ainvs(), n, None).with_source(source)
}

/// Minimal at every prime below 1000, with 2 and 3 handled by Tate.
pub fn quasi_minimal(curve: &WeierstrassCurve) -> WeierstrassCurve {
    let g = curve.c4.gcd(&curve.c6);
    let g = if g.is_zero() { curve.disc.abs() } else { g };
    let primes: Vec<BigUint> = sieve_primes(SMALL_PRIME_LIMIT)
        .primes()
        .iter()
        .filter(|&&p| (&g % BigInt::from(p)).is_zero())
        .map(|&p| BigUint::from(p))
        .collect();
    curve.minimal_at(&primes).unwrap_or_else(|_| curve.clone())
}

/// Pairwise coprime numbers whose products generate the same multiplicative
/// group as `nums`.
fn coprime_base(nums: &[BigUint]) -> Vec<BigUint> {
    let mut base: Vec<BigUint> = Vec::new();
    let mut work: Vec<BigUint> = nums.iter().filter(|n| **n > BigUint::one()).cloned().collect();
    while let Some(x) = work.pop() {
        if x.is_one() {
            continue;
        }
        let Some(i) = base.iter().position(|b| !b.gcd(&x).is_one()) else {
            base.push(x);
            continue;
        };
        let b = base.swap_remove(i);
        let g = b.gcd(&x);
        if g == x && g == b {
            base.push(x);
            continue;
        }
        work.push(&b / &g);
        work.push(&x / &g);
        work.push(g);
    }
    base
}

fn perfect_root(n: &BigUint) -> BigUint {
    for k in (2..=(n.bits() as u32).min(64)).rev() {
        let r = n.nth_root(k);
        if r > BigUint::one() && r.pow(k) == *n {
            return perfect_root(&r);
        }
    }
    n.clone()
}

fn without_small_primes(mut r: BigUint) -> BigUint {
    for &p in sieve_primes(SMALL_PRIME_LIMIT).primes() {
        let p = BigUint::from(p);
        while (&r % &p).is_zero() {
            r /= &p;
        }
    }
    r
}

/// Pieces of `b` grouped by how often they divide `n`.
fn split_by_valuation(b: &BigUint, n: &BigUint) -> Vec<BigUint> {
    let mut cur = n.gcd(b);
    let mut pieces = vec![b / &cur];
    let mut m = n.clone();
    while cur > BigUint::one() {
        m /= &cur;
        let next = m.gcd(&cur);
        pieces.push(&cur / &next);
        cur = next;
    }
    pieces.retain(|p| *p > BigUint::one());
    pieces
}

/// Divides out scalings u with u^4 | c4 and u^6 | c6 found from a coprime
/// base of (c4, c6, disc), without factoring. Primes below 1000 are left to
/// [`quasi_minimal`].
fn remove_scaling(curve: &WeierstrassCurve) -> WeierstrassCurve {
    let (c4, c6, d) = (curve.c4.magnitude(), curve.c6.magnitude(), curve.disc.magnitude());
    let g = c4.gcd(c6);
    if g.is_zero() || g.is_one() {
        return curve.clone();
    }
    let base = coprime_base(&[c4 / &g, c6 / &g, d / &g, c4.clone(), c6.clone(), g.clone(), d.clone()]);
    let mut pieces = Vec::new();
    for b in base {
        for p in split_by_valuation(&perfect_root(&without_small_primes(b)), c4) {
            pieces.extend(split_by_valuation(&p, c6));
        }
    }
    let mut q = curve.clone();
    for r in pieces {
        let r = BigInt::from(r);
        let (r4, r6) = (r.pow(4), r.pow(6));
        while (&q.c4 % &r4).is_zero() && (&q.c6 % &r6).is_zero() {
            match model_from_c4c6(&(&q.c4 / &r4), &(&q.c6 / &r6)) {
                Some(m) => q = m,
                None => break,
            }
        }
    }
    q
}

/// Emitted model, conductor and the (c4, c6) of the minimal model.
type Candidate = (WeierstrassCurve, BigUint, (BigInt, BigInt));

fn pencil_candidate(k: usize, cfg: &GenConfig, index: u64) -> Option<Candidate> {
    let mut rng = candidate_rng(cfg.seed, k as u64, index);
    let pc = gen_pencil_cubic_with(k, cfg.coord_bound, &mut rng).ok()?;
    let (curve, map) = match cubic_to_weierstrass(&pc.cubic, &pc.points[0]) {
        Ok(x) => x,
        Err(e) => {
            debug!("k={k} candidate {index}: {e}");
            return None;
        }
    };
    for x in &pc.points[1..] {
        match map.apply(x) {
            Ok(Some(img)) if !crate::curve::point_on_curve(&curve, &img) => {
                warn!("k={k} candidate {index}: image of {x:?} is off the model");
                return None;
            }
            Err(e) => {
                warn!("k={k} candidate {index}: {e}");
                return None;
            }
            _ => {}
        }
    }
    // the construction scales by large factors; most of them show up in gcd(c4, c6)
    let reduced = remove_scaling(&quasi_minimal(&curve));
    let g = factorize(reduced.c4.gcd(&reduced.c6).magnitude(), cfg.factor_budget);
    let reduced = reduced.minimal_at(g.primes()).ok()?;
    if !torsion_is_trivial(&reduced) {
        return None;
    }
    let fac = factorize(reduced.disc.magnitude(), cfg.factor_budget);
    if !fac.is_complete() {
        debug!("k={k} candidate {index}: discriminant not factored");
        return None;
    }
    let minimal = reduced.minimal_model(&fac).ok()?;
    let n = conductor(&reduced, &fac).ok()?;
    let key = (minimal.c4.clone(), minimal.c6.clone());
    Some((minimal, n, key))
}

fn random_candidate(cfg: &GenConfig, index: u64) -> Option<Candidate> {
    let curve = draw_weierstrass(cfg.coeff_bound.max(1) as i64, &mut candidate_rng(cfg.seed, STREAM_RANDOM, index))?;
    if !torsion_is_trivial(&curve) {
        return None;
    }
    let fac = curve.factor_disc(cfg.factor_budget);
    let n = conductor(&curve, &fac).ok()?;
    let minimal = curve.minimal_model(&fac).ok()?;
    Some((curve, n, (minimal.c4, minimal.c6)))
}

/// Draw candidates in parallel batches, keeping the first `count` new ones in index order.
fn fill_stream<F>(count: usize, max_attempts: usize, seen: &mut HashSet<(BigInt, BigInt)>, f: F) -> Vec<(WeierstrassCurve, BigUint)>
where
    F: Fn(u64) -> Option<Candidate> + Sync,
{
    let mut out = Vec::with_capacity(count);
    let mut index = 0usize;
    while out.len() < count && index < max_attempts {
        let end = (index + BATCH).min(max_attempts);
        let batch: Vec<_> = (index..end).into_par_iter().map(|i| f(i as u64)).collect();
        index = end;
        for (curve, n, key) in batch.into_iter().flatten() {
            if out.len() == count {
                break;
            }
            if seen.insert(key) {
                out.push((curve, n));
            }
        }
    }
    out
}

/// Random-coefficient curves followed by pencil curves for each k, all with
/// trivial torsion and distinct (c4, c6). Unlabeled.
pub fn generate_custom_dataset(cfg: &GenConfig) -> Result<Vec<CurveRecord>> {
    if let Some(&k) = cfg.pencil_counts.keys().find(|k| !(2..=8).contains(*k)) {
        return Err(crate::Error::InvalidArgument(format!("pencil k = {k} outside 2..=8")));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let budget = |n: usize| n.saturating_mul(cfg.attempts_per_curve).max(BATCH);
    if cfg.random_count > 0 {
        let got = fill_stream(cfg.random_count, budget(cfg.random_count), &mut seen, |i| random_candidate(cfg, i));
        if got.len() < cfg.random_count {
            warn!("random stream produced {} of {} curves", got.len(), cfg.random_count);
        }
        out.extend(got.into_iter().enumerate().map(|(i, (c, n))| {
            let mut r = record_for(&c, n, "random");
            r.id = format!("w{i}");
            r
        }));
    }
    for (&k, &count) in &cfg.pencil_counts {
        if count == 0 {
            continue;
        }
        let got = fill_stream(count, budget(count), &mut seen, |i| pencil_candidate(k, cfg, i));
        if got.len() < count {
            warn!("pencil k={k} produced {} of {count} curves", got.len());
        }
        out.extend(got.into_iter().enumerate().map(|(i, (c, n))| {
            let mut r = record_for(&c, n, &format!("pencil-k{k}"));
            r.id = format!("k{k}_{i}");
            r
        }));
    }
    Ok(out)
}
