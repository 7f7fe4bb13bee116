use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{mul_mod, pow_mod, sieve_primes};

const TRIAL_LIMIT: u64 = 1_000_000;
const RANDOM_MR_BASES: usize = 30;
// Bases 2..=41 decide primality for every n below this bound.
const MR_DETERMINISTIC_LIMIT: &str = "3317044064679887385961981";
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Prime factorization, possibly partial.
///
/// `product(p^e) * cofactor` always equals the factored integer. A cofactor
/// above one is whatever could not be split within the effort budget; it is
/// composite or at least not proven prime.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactorMap {
    pub factors: BTreeMap<BigUint, u32>,
    pub cofactor: BigUint,
}

impl FactorMap {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.keys()
    }

    pub fn exponent(&self, p: &BigUint) -> u32 {
        self.factors.get(p).copied().unwrap_or(0)
    }

    /// Multiply the factorization back out.
    pub fn reconstruct(&self) -> BigUint {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, (p, &e)| acc * p.pow(e))
    }

    fn add(&mut self, p: BigUint, e: u32) {
        *self.factors.entry(p).or_insert(0) += e;
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(TRIAL_LIMIT + 1).primes().to_vec())
}

/// Remainder of a big integer by a word-sized divisor.
fn rem_small(n: &BigUint, d: u64) -> u64 {
    let d = d as u128;
    n.iter_u32_digits()
        .rev()
        .fold(0u128, |r, digit| ((r << 32) | digit as u128) % d) as u64
}

/// Factor `n` by trial division to 10^6 followed by Pollard rho.
///
/// `effort_budget` caps the total number of rho iterations spent on the part
/// that survives trial division.
pub fn factorize(n: &BigUint, effort_budget: u64) -> FactorMap {
    let mut out = FactorMap { factors: BTreeMap::new(), cofactor: BigUint::one() };
    if n.is_zero() {
        out.cofactor = BigUint::zero();
        return out;
    }
    let mut rest = n.clone();
    for &p in small_primes() {
        if let Some(r) = rest.to_u64() {
            if p.saturating_mul(p) > r {
                break;
            }
        }
        if rem_small(&rest, p) == 0 {
            let mut e = 0;
            while rem_small(&rest, p) == 0 {
                rest /= p;
                e += 1;
            }
            out.add(BigUint::from(p), e);
        }
    }
    if rest.is_one() {
        return out;
    }
    // Anything left below 10^12 with no factor up to 10^6 is prime.
    if rest < BigUint::from(TRIAL_LIMIT * TRIAL_LIMIT) {
        out.add(rest, 1);
        return out;
    }
    let mut budget = effort_budget;
    let mut pending = vec![rest];
    let mut stuck = BigUint::one();
    while let Some(m) = pending.pop() {
        if is_probable_prime(&m) {
            out.add(m, 1);
            continue;
        }
        if let Some((root, k)) = exact_power(&m) {
            pending.extend(std::iter::repeat(root).take(k as usize));
            continue;
        }
        match pollard_brent(&m, &mut budget) {
            Some(d) => {
                let other = &m / &d;
                pending.push(d);
                pending.push(other);
            }
            None => stuck *= m,
        }
    }
    out.cofactor = stuck;
    out
}

/// `n = root^k` with `k >= 2` maximal among small exponents tried.
fn exact_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    (2..=bits).rev().find_map(|k| {
        let r = n.nth_root(k);
        (r > BigUint::one() && r.pow(k) == *n).then_some((r, k))
    })
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES[..12] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin: the fixed bases 2..=41 (a proof below 3.3e24) plus 30
/// pseudo-random bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &MR_BASES {
        if rem_small(n, p) == 0 {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            return false;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };
    if MR_BASES.iter().any(|&a| witness(&BigUint::from(a))) {
        return false;
    }
    let limit: BigUint = MR_DETERMINISTIC_LIMIT.parse().expect("constant");
    if *n < limit {
        return true;
    }
    // Seeded from n so the answer is reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(rem_small(n, u64::MAX >> 1));
    let two = BigUint::from(2u32);
    (0..RANDOM_MR_BASES).all(|_| !witness(&rng.gen_biguint_range(&two, &n_minus_1)))
}

/// Brent's variant of Pollard rho. Consumes iterations from `budget` and
/// returns a nontrivial divisor when one is found.
fn pollard_brent(n: &BigUint, budget: &mut u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(small) = n.to_u64() {
        return pollard_brent_u64(small, budget).map(BigUint::from);
    }
    let one = BigUint::one();
    for c in 1u32.. {
        if *budget == 0 {
            return None;
        }
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x;
        let mut ys;
        let mut q = BigUint::one();
        let mut r: u64 = 1;
        let m: u64 = 128;
        let mut g;
        loop {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            loop {
                ys = y.clone();
                let steps = m.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                *budget = budget.saturating_sub(steps);
                g = q.gcd(n);
                k += steps;
                if k >= r || g != one || *budget == 0 {
                    break;
                }
            }
            r *= 2;
            if g != one || *budget == 0 {
                break;
            }
        }
        if g == *n {
            // Backtrack one step at a time.
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if g != one && g != *n {
            return Some(g);
        }
    }
    None
}

fn pollard_brent_u64(n: u64, budget: &mut u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1u64.. {
        if *budget == 0 {
            return None;
        }
        let f = |x: u64| ((mul_mod(x, x, n) as u128 + c as u128) % n as u128) as u64;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let (mut q, mut g, mut r) = (1u64, 1u64, 1u64);
        let m = 128u64;
        while g == 1 && *budget > 0 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = m.min(r - k);
                for _ in 0..steps {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                *budget = budget.saturating_sub(steps);
                g = q.gcd(&n);
                k += steps;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != 1 && g != n {
            return Some(g);
        }
    }
    None
}
