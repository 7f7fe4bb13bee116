use crate::curve::{ApRecord, ReductionType};
use crate::error::{Error, Result};

use super::{cn_table, Kahan};

fn good_below(rec: &ApRecord, b: u64) -> Result<impl Iterator<Item = (f64, f64)> + '_> {
    if b < 2 {
        return Err(Error::InvalidArgument(format!("bound {b} must be at least 2")));
    }
    rec.require_primes_up_to(b - 1)?;
    Ok(rec
        .iter_below(b)
        .filter(|&(_, _, r)| r == ReductionType::Good)
        .map(|(p, a, _)| (p as f64, a as f64)))
}

fn log_bound(b: u64) -> Result<f64> {
    if b < 3 {
        return Err(Error::InvalidArgument(format!("bound {b} must be at least 3")));
    }
    Ok((b as f64).ln())
}

/// `(1/log B) Σ_{good p<B} a_p log p / p`.
pub fn s0(rec: &ApRecord, b: u64) -> Result<f64> {
    let lb = log_bound(b)?;
    let k: Kahan = good_below(rec, b)?.map(|(p, a)| a * p.ln() / p).sum();
    Ok(k.value() / lb)
}

fn cn_lambda_sums(rec: &ApRecord, b: u64) -> Result<(f64, f64)> {
    let t = cn_table(rec, b)?;
    let mut plain = Kahan::default();
    let mut weighted = Kahan::default();
    for e in &t.entries {
        plain.add(e.c * e.lambda);
        weighted.add(e.c * e.lambda / e.n as f64);
    }
    Ok((plain.value(), weighted.value()))
}

/// `S0 − (1/(B log B)) Σ_{n≤B} c_n Λ(n)`.
pub fn s1(rec: &ApRecord, b: u64) -> Result<f64> {
    let lb = log_bound(b)?;
    let (plain, _) = cn_lambda_sums(rec, b)?;
    Ok(s0(rec, b)? - plain / (b as f64 * lb))
}

/// `(1/log B) Σ_{n≤B} c_n Λ(n)/n − (1/(B log B)) Σ_{n≤B} c_n Λ(n)`.
pub fn s2(rec: &ApRecord, b: u64) -> Result<f64> {
    if b < 2 {
        return Err(Error::InvalidArgument(format!("bound {b} must be at least 2")));
    }
    let lb = (b as f64).ln();
    let (plain, weighted) = cn_lambda_sums(rec, b)?;
    Ok(weighted / lb - plain / (b as f64 * lb))
}

/// `Σ_{good p<B} (2 − a_p) log p / (p + 1 − a_p)`.
pub fn s3(rec: &ApRecord, b: u64) -> Result<f64> {
    let k: Kahan = good_below(rec, b)?.map(|(p, a)| (2.0 - a) * p.ln() / (p + 1.0 - a)).sum();
    Ok(k.value())
}

/// `(1/B) Σ_{good p<B} −a_p log p`.
pub fn s4(rec: &ApRecord, b: u64) -> Result<f64> {
    let k: Kahan = good_below(rec, b)?.map(|(p, a)| -a * p.ln()).sum();
    Ok(k.value() / b as f64)
}

/// `Σ_{good p<B} log((p+1−a_p)/p) + Σ_{split p<B} log(3(p−1)/(2p))`.
pub fn s5(rec: &ApRecord, b: u64) -> Result<f64> {
    if b < 2 {
        return Err(Error::InvalidArgument(format!("bound {b} must be at least 2")));
    }
    rec.require_primes_up_to(b - 1)?;
    let mut k = Kahan::default();
    for (p, a, r) in rec.iter_below(b) {
        let p = p as f64;
        match r {
            ReductionType::Good => k.add(((p + 1.0 - a as f64) / p).ln()),
            ReductionType::SplitMultiplicative => k.add((1.5 * (p - 1.0) / p).ln()),
            _ => {}
        }
    }
    Ok(k.value())
}

/// `Π_{good p<B} (1 − a_p p^{−s} + p^{1−2s})^{−1}` for real `s > 1/2`.
pub fn partial_euler_product(rec: &ApRecord, b: u64, s: f64) -> Result<f64> {
    if !(s > 0.5) {
        return Err(Error::InvalidArgument(format!("s = {s} must exceed 1/2")));
    }
    let k: Kahan = good_below(rec, b)?
        .map(|(p, a)| (1.0 - a * p.powf(-s) + p.powf(1.0 - 2.0 * s)).ln())
        .sum();
    Ok((-k.value()).exp())
}
