//! Trace of Frobenius at primes of good reduction by character sums.

use num_bigint::{BigInt, BigUint};

use crate::error::{Error, Result};

use super::local::{large_prime_data, tate, ReductionType};
use super::weierstrass::{residue, Invariants, WeierstrassCurve};

/// Quadratic character of F_p as a lookup table (`chi[0] = 0`).
pub struct QrTable {
    p: u64,
    chi: Vec<i8>,
}

impl QrTable {
    pub fn new(p: u64) -> Self {
        assert!(p > 2, "quadratic character table needs an odd prime");
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        let mut sq = 0u64;
        for x in 1..=(p - 1) / 2 {
            sq += 2 * x - 1;
            if sq >= p {
                sq %= p;
            }
            chi[sq as usize] = 1;
        }
        Self { p, chi }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn chi(&self, a: u64) -> i8 {
        self.chi[a as usize]
    }

    /// `-sum_x chi(4x^3 + b2 x^2 + 2 b4 x + b6)` with residues already reduced mod p.
    pub fn trace(&self, b2: u64, b4: u64, b6: u64) -> i32 {
        let p = self.p;
        let chi = &self.chi[..];
        // forward differences of the cubic, stepping x by one
        let mut f = b6;
        let mut d1 = (4 + b2 + 2 * b4) % p;
        let mut d2 = (24 + 2 * b2) % p;
        let d3 = 24 % p;
        let mut s: i32 = 0;
        for _ in 0..p {
            s += chi[f as usize] as i32;
            f += d1;
            if f >= p {
                f -= p;
            }
            d1 += d2;
            if d1 >= p {
                d1 -= p;
            }
            d2 += d3;
            if d2 >= p {
                d2 -= p;
            }
        }
        -s
    }
}

/// a_2 by enumerating F_2 x F_2 on the given model.
fn trace_at_two(a: &[BigInt; 5]) -> i32 {
    let [a1, a2, a3, a4, a6] = a.each_ref().map(|x| residue(x, 2));
    let mut affine = 0;
    for x in 0..2u64 {
        for y in 0..2u64 {
            let lhs = y * y + a1 * x * y + a3 * y;
            let rhs = x * x * x + a2 * x * x + a4 * x + a6;
            if (lhs + rhs) % 2 == 0 {
                affine += 1;
            }
        }
    }
    3 - (affine + 1)
}

fn trace_from_ainvs(a: &[BigInt; 5], p: u64, table: Option<&QrTable>) -> i32 {
    if p == 2 {
        return trace_at_two(a);
    }
    let inv = Invariants::of(a);
    trace_with(&inv.b2, &inv.b4, &inv.b6, p, table)
}

fn trace_with(b2: &BigInt, b4: &BigInt, b6: &BigInt, p: u64, table: Option<&QrTable>) -> i32 {
    let (r2, r4, r6) = (residue(b2, p), residue(b4, p), residue(b6, p));
    match table {
        Some(t) => t.trace(r2, r4, r6),
        None => QrTable::new(p).trace(r2, r4, r6),
    }
}

/// Reduction type and a_p at any prime, on the p-minimal model.
pub(crate) fn local_ap(curve: &WeierstrassCurve, p: u64, table: Option<&QrTable>) -> (ReductionType, i32) {
    if residue(&curve.disc, p) != 0 {
        let ap = if p == 2 {
            trace_at_two(&curve.ainvs())
        } else {
            trace_with(&curve.b2, &curve.b4, &curve.b6, p, table)
        };
        return (ReductionType::Good, ap);
    }
    if p == 2 || p == 3 {
        let data = tate(&curve.ainvs(), p);
        return match data.reduction.bad_ap() {
            Some(ap) => (data.reduction, ap),
            None => (ReductionType::Good, trace_from_ainvs(&data.minimal, p, table)),
        };
    }
    let data = large_prime_data(curve, &BigUint::from(p));
    if data.disc_valuation == 0 {
        // short minimal model y^2 = x^3 - 27 c4 x - 54 c6: b2 = 0, b4 = 2A, b6 = 4B
        let b4 = BigInt::from(-54) * &data.c4;
        let b6 = BigInt::from(-216) * &data.c6;
        return (ReductionType::Good, trace_with(&BigInt::from(0), &b4, &b6, p, table));
    }
    let (red, ap) = super::local::reduction_type(curve, p).expect("bad prime after minimalization");
    (red, ap)
}

/// `a_p = p + 1 - #E(F_p)` at a prime of good reduction.
///
/// Non-minimal models are minimalized at p first, so `p | disc` is only an
/// error when the reduction really is bad.
pub fn ap_good_prime(curve: &WeierstrassCurve, p: u64) -> Result<i32> {
    match local_ap(curve, p, None) {
        (ReductionType::Good, ap) => Ok(ap),
        _ => Err(Error::BadReductionPrime(p)),
    }
}

/// `#E(F_p)` at a good prime.
pub fn group_order(curve: &WeierstrassCurve, p: u64) -> Result<u64> {
    let ap = ap_good_prime(curve, p)?;
    Ok((p as i64 + 1 - ap as i64) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(curve: &WeierstrassCurve, p: u64) -> i32 {
        let a = curve.ainvs().map(|x| residue(&x, p));
        let mut n = 1i64;
        for x in 0..p {
            for y in 0..p {
                let lhs = (y * y + a[0] * x % p * y + a[2] * y) % p;
                let rhs = (x * x % p * x + a[1] * x % p * x + a[3] * x + a[4]) % p;
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        (p as i64 + 1 - n) as i32
    }

    #[test]
    fn spec_examples() {
        let e37 = WeierstrassCurve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        assert_eq!(ap_good_prime(&e37, 2).unwrap(), -2);
        let e = WeierstrassCurve::from_ainvs([0, 0, 0, 1, 1]).unwrap();
        assert_eq!(ap_good_prime(&e, 5).unwrap(), -3);
        let e = WeierstrassCurve::from_ainvs([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(ap_good_prime(&e, 3).unwrap(), 0);
        assert!(matches!(ap_good_prime(&e37, 37), Err(Error::BadReductionPrime(37))));
    }

    #[test]
    fn character_sum_matches_enumeration() {
        let curves = [[0, -1, 1, -10, -20], [1, 0, 1, 4, -6], [0, 1, 1, -2, 0], [1, -1, 0, -123, 457]];
        for a in curves {
            let e = WeierstrassCurve::from_ainvs(a).unwrap();
            for p in [2u64, 3, 5, 7, 13, 31, 97, 211] {
                if residue(&e.disc, p) == 0 {
                    continue;
                }
                assert_eq!(ap_good_prime(&e, p).unwrap(), brute(&e, p), "{e} p={p}");
            }
        }
    }

    #[test]
    fn non_minimal_model_is_minimalized() {
        // 11a1 scaled by u = 5 and u = 2: same a_p away from 11.
        let base = WeierstrassCurve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        for u in [2i64, 5] {
            let scaled = WeierstrassCurve::from_ainvs([0, -u * u, u * u * u, -10 * u.pow(4), -20 * u.pow(6)]).unwrap();
            assert_eq!(ap_good_prime(&scaled, u as u64).unwrap(), ap_good_prime(&base, u as u64).unwrap());
        }
    }
}
