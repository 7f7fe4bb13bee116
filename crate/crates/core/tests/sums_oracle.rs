//! Sums on curves of rank 0..3 against 30-digit mpmath values
//! (`scripts/sums_oracle.py`).

use std::collections::BTreeMap;
use std::sync::Arc;

use ecrank_core::arith::sieve_primes;
use ecrank_core::curve::{ap_batch, WeierstrassCurve};
use ecrank_core::sums::{digamma_integral, s0, s1, s2, s3, s4, s5, s6, s6_with_step};
use num_bigint::BigUint;
use serde::Deserialize;

#[derive(Deserialize)]
struct Entry {
    ainvs: [i64; 5],
    conductor: u64,
    rank: u32,
    #[serde(rename = "S")]
    s: Vec<String>,
    #[serde(rename = "S6")]
    s6: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct Oracle {
    #[serde(rename = "B")]
    b: u64,
    integral: BTreeMap<String, String>,
    curves: BTreeMap<String, Entry>,
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn sums_match_high_precision_reference() {
    let oracle: Oracle = serde_json::from_str(include_str!("data/sums_oracle.json")).unwrap();
    let mut tags: Vec<&String> = oracle.curves.keys().collect();
    tags.sort_by_key(|t| oracle.curves[*t].rank);
    let curves: Vec<WeierstrassCurve> =
        tags.iter().map(|t| WeierstrassCurve::from_ainvs(oracle.curves[*t].ainvs).unwrap()).collect();
    // e^{4π} ≈ 286751.3, so S6(2) needs every prime up to 286751
    let table = Arc::new(sieve_primes(286_752));
    let records: Vec<_> = ap_batch(&curves, &table).into_iter().map(Result::unwrap).collect();

    let mut by_rank = Vec::new();
    for (tag, rec) in tags.iter().zip(&records) {
        let e = &oracle.curves[*tag];
        let n = BigUint::from(e.conductor);
        let got = [s0, s1, s2, s3, s4, s5].map(|f| f(rec, oracle.b).unwrap());
        for (i, (g, w)) in got.iter().zip(&e.s).enumerate() {
            let w = num(w);
            assert!((g - w).abs() <= 1e-10 * w.abs().max(1.0), "{tag} S{i}: {g} vs {w}");
        }
        for (d, w) in &e.s6 {
            let g = s6(rec, &n, num(d)).unwrap();
            assert!((g - num(w)).abs() < 1e-8, "{tag} S6({d}): {g} vs {w}");
        }
        by_rank.push((got, s6(rec, &n, 2.0).unwrap()));
    }
    for w in by_rank.windows(2) {
        assert!(w[1].0[0] < w[0].0[0], "S0 must decrease with rank");
        assert!(w[1].0[3] > w[0].0[3], "S3 must increase with rank");
        assert!(w[1].1 > w[0].1, "S6(2) must increase with rank");
    }
    let s6_37 = by_rank[1].1;
    assert!((1.0..=1.6).contains(&s6_37), "37a1 S6(2) = {s6_37}");

    // halving the panel width moves S6 by less than 1e-8
    let n = BigUint::from(37u32);
    for d in [0.5, 1.0, 2.0] {
        let a = s6_with_step(&records[1], &n, d, 0.5 / d).unwrap();
        let b = s6_with_step(&records[1], &n, d, 0.25 / d).unwrap();
        assert!((a - b).abs() < 1e-8, "Δ = {d}: {a} vs {b}");
    }
}

#[test]
fn digamma_integral_matches_reference() {
    let oracle: Oracle = serde_json::from_str(include_str!("data/sums_oracle.json")).unwrap();
    for (d, w) in &oracle.integral {
        let d = num(d);
        let g = digamma_integral(d, 0.5 / d).unwrap();
        assert!((g - num(w)).abs() < 1e-9, "I({d}) = {g} vs {w}");
    }
    let coarse = digamma_integral(1.0, 0.5).unwrap();
    let fine = digamma_integral(1.0, 0.05).unwrap();
    assert!((coarse - fine).abs() < 1e-9);
}
