//! Number-theoretic primitives shared by the curve, sum and dataset layers.
//!
//! Everything here is pure; [`PrimeTable`] is immutable once built and can be
//! shared freely between threads.

mod digamma;
mod factor;
mod primes;

pub use digamma::digamma_complex;
pub use factor::{factorize, is_probable_prime, is_prime_u64, FactorMap};
pub use primes::{prime_powers_up_to, sieve_primes, von_mangoldt, PrimePower, PrimeTable};

use crate::error::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Residue of a signed integer modulo `m`, in `[0, m)`.
#[inline]
pub fn residue_i64(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Legendre symbol `(a / p)` for an odd prime `p`, by Euler's criterion.
pub fn legendre_symbol(a: i64, p: u64) -> Result<i8> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "legendre symbol needs an odd prime modulus, got {p}"
        )));
    }
    let r = residue_i64(a, p);
    if r == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}
