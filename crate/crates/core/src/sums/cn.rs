use crate::arith::prime_powers_up_to;
use crate::curve::ApRecord;
use crate::error::Result;

/// `c_n` and `Λ(n)` at a prime power `n = p^m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CnEntry {
    pub n: u64,
    pub p: u64,
    pub m: u32,
    pub c: f64,
    pub lambda: f64,
}

/// `c_n` for all prime powers `n <= bound`, ordered by n.
///
/// At good p, `c_{p^m} = α^m + β^m`; at bad p, `c_{p^m} = a_p^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CnTable {
    pub bound: u64,
    pub entries: Vec<CnEntry>,
}

impl CnTable {
    pub fn get(&self, n: u64) -> Option<&CnEntry> {
        self.entries.binary_search_by_key(&n, |e| e.n).ok().map(|i| &self.entries[i])
    }
}

pub fn cn_table(rec: &ApRecord, bound: u64) -> Result<CnTable> {
    rec.require_primes_up_to(bound)?;
    let mut powers = prime_powers_up_to(bound);
    // group by prime so the recurrence runs in order of m
    powers.sort_by_key(|pp| (pp.p, pp.m));
    let mut entries = Vec::with_capacity(powers.len());
    let mut it = rec.iter().peekable();
    let mut i = 0;
    while i < powers.len() {
        let p = powers[i].p;
        let (ap, red) = loop {
            let (q, a, r) = it.next().expect("coverage checked above");
            if q == p {
                break (a as i128, r);
            }
        };
        let good = red.bad_ap().is_none();
        let lambda = (p as f64).ln();
        let (mut prev, mut cur) = (2i128, ap);
        while i < powers.len() && powers[i].p == p {
            let pp = powers[i];
            entries.push(CnEntry { n: pp.value, p, m: pp.m, c: cur as f64, lambda });
            let next = if good { cur * ap - p as i128 * prev } else { cur * ap };
            prev = cur;
            cur = next;
            i += 1;
        }
    }
    entries.sort_by_key(|e| e.n);
    Ok(CnTable { bound, entries })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::arith::sieve_primes;
    use crate::curve::{ap_record, ReductionType, WeierstrassCurve};

    #[test]
    fn recurrence_values() {
        let e = WeierstrassCurve::from_ainvs([0, 0, 0, 1, 1]).unwrap();
        let rec = ap_record(&e, &Arc::new(sieve_primes(200)));
        let t = cn_table(&rec, 150).unwrap();
        assert_eq!(t.get(5).unwrap().c, -3.0);
        assert_eq!(t.get(25).unwrap().c, -1.0);
        assert_eq!(t.get(125).unwrap().c, -3.0 * -1.0 - 5.0 * -3.0);
        let a7 = t.get(7).unwrap().c;
        assert_eq!(t.get(49).unwrap().c, a7 * a7 - 14.0);
        assert!(t.get(6).is_none());
        assert_eq!(t.get(32).unwrap().m, 5);
    }

    #[test]
    fn bad_primes_use_powers() {
        let e = WeierstrassCurve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        let rec = ap_record(&e, &Arc::new(sieve_primes(200)));
        assert_eq!(rec.iter().find(|x| x.0 == 11).unwrap().2, ReductionType::SplitMultiplicative);
        let t = cn_table(&rec, 150).unwrap();
        assert_eq!(t.get(11).unwrap().c, 1.0);
        assert_eq!(t.get(121).unwrap().c, 1.0);
    }

    #[test]
    fn needs_coverage() {
        let e = WeierstrassCurve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let rec = ap_record(&e, &Arc::new(sieve_primes(100)));
        assert!(cn_table(&rec, 100).is_ok());
        assert!(cn_table(&rec, 101).is_err());
    }
}
