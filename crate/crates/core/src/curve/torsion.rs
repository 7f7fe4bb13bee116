//! Rational torsion filter.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{factorize, sieve_primes};

use super::count::local_ap;
use super::local::ReductionType;
use super::point::{scalar_mul, ProjectivePoint};
use super::weierstrass::WeierstrassCurve;

const GOOD_PRIMES: usize = 30;
const FACTOR_BUDGET: u64 = 1 << 22;

/// gcd of `#E(F_p)` over the first 30 good primes `p > 3`. The torsion
/// order divides it.
pub fn torsion_bound(curve: &WeierstrassCurve) -> u64 {
    let table = sieve_primes(20_000);
    let mut g = 0u64;
    let mut seen = 0;
    for &p in table.primes().iter().filter(|&&p| p > 3) {
        let (red, ap) = local_ap(curve, p, None);
        if red != ReductionType::Good {
            continue;
        }
        g = g.gcd(&((p as i64 + 1 - ap as i64) as u64));
        seen += 1;
        if seen == GOOD_PRIMES || g == 1 {
            break;
        }
    }
    g
}

/// True when the rational torsion subgroup is certainly trivial.
///
/// If the Lutz–Nagell search cannot be completed because the discriminant
/// of the short model does not factor within budget, the answer is false.
pub fn torsion_is_trivial(curve: &WeierstrassCurve) -> bool {
    let g = torsion_bound(curve);
    if g == 1 {
        return true;
    }
    match find_torsion_point(curve, g) {
        Some(Some(_)) => false,
        Some(None) => true,
        None => {
            log::debug!("torsion search incomplete for {curve}; treating as nontrivial");
            false
        }
    }
}

/// Integral point of order dividing `g` on the short model, `Some(None)` when
/// there is provably none, `None` when the search could not finish.
pub fn find_torsion_point(curve: &WeierstrassCurve, g: u64) -> Option<Option<ProjectivePoint>> {
    let short = curve.short_model();
    let (a, b) = (&short.a4, &short.a6);
    let orders: Vec<i64> = (2..=12).filter(|&n| g % n as u64 == 0).collect();
    if orders.is_empty() {
        return Some(None);
    }
    if g % 2 == 0 {
        if let Some(x) = integer_roots(a, b).into_iter().next() {
            return Some(Some(ProjectivePoint::new(x, BigInt::zero(), BigInt::one()).unwrap()));
        }
    }
    let d: BigInt = BigInt::from(4) * a * a * a + BigInt::from(27) * b * b;
    let fac = factorize(d.magnitude(), FACTOR_BUDGET);
    if !fac.is_complete() {
        return None;
    }
    let mut ys = vec![BigUint::one()];
    for (p, &e) in &fac.factors {
        let mut next = Vec::with_capacity(ys.len() * (e as usize / 2 + 1));
        for y in &ys {
            let mut v = y.clone();
            for _ in 0..=e / 2 {
                next.push(v.clone());
                v *= p;
            }
        }
        ys = next;
    }
    for y in ys {
        let y = BigInt::from(y);
        let c = b - &y * &y;
        for x in integer_roots(a, &c) {
            let pt = ProjectivePoint::new(x, y.clone(), BigInt::one()).unwrap();
            let torsion = orders
                .iter()
                .any(|&n| scalar_mul(&short, n, &pt).map(|q| q.is_infinity()).unwrap_or(false));
            if torsion {
                return Some(Some(pt));
            }
        }
    }
    Some(None)
}

fn cubic(a: &BigInt, c: &BigInt, x: &BigInt) -> BigInt {
    x * x * x + a * x + c
}

/// Integer roots of `x^3 + a x + c`.
fn integer_roots(a: &BigInt, c: &BigInt) -> Vec<BigInt> {
    let bound = BigInt::one() + a.abs().max(c.abs());
    let mut out = Vec::new();
    let mut push = |x: Option<BigInt>| {
        if let Some(x) = x {
            if !out.contains(&x) {
                out.push(x);
            }
        }
    };
    if !a.is_negative() {
        push(monotone_root(a, c, -&bound, bound.clone(), true));
    } else {
        // decreasing on [-k, k], increasing outside, k = floor(sqrt(-a/3))
        let k: BigInt = (-a / BigInt::from(3)).sqrt();
        push(monotone_root(a, c, -&bound, -&k - 1, true));
        push(monotone_root(a, c, -&k, k.clone(), false));
        push(monotone_root(a, c, &k + 1, bound, true));
    }
    out
}

fn monotone_root(a: &BigInt, c: &BigInt, mut lo: BigInt, mut hi: BigInt, increasing: bool) -> Option<BigInt> {
    if lo > hi {
        return None;
    }
    let sign = |x: &BigInt| {
        let v = cubic(a, c, x);
        if increasing { v } else { -v }
    };
    // first x with sign(x) >= 0
    if sign(&hi).is_negative() {
        return None;
    }
    while lo < hi {
        let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
        if sign(&mid).is_negative() {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    cubic(a, c, &lo).is_zero().then_some(lo)
}
