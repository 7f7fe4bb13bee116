use serde::{Deserialize, Serialize};

/// All primes strictly below `bound`, with 1-based ordinals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(bound: u64) -> Self {
        sieve_primes(bound)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// π(bound), the number of primes below the bound.
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// 1-based ordinal of `p`, so that `index_of(p_n) == Some(n)`.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok().map(|i| i + 1)
    }

    /// Number of primes strictly below `x` (for `x <= bound`).
    pub fn count_below(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p < x)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n < self.bound && self.primes.binary_search(&n).is_ok()
    }
}

/// Sieve of Eratosthenes over odd numbers.
pub fn sieve_primes(bound: u64) -> PrimeTable {
    if bound <= 2 {
        return PrimeTable { bound, primes: Vec::new() };
    }
    let n = bound as usize;
    // composite[i] describes the odd number 2i + 1
    let half = n / 2;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) < n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_pi(bound));
    primes.push(2);
    primes.extend(
        (1..half)
            .filter(|&i| !composite[i] && 2 * i + 1 < n)
            .map(|i| (2 * i + 1) as u64),
    );
    PrimeTable { bound, primes }
}

fn estimate_pi(x: u64) -> usize {
    let xf = x as f64;
    if xf < 10.0 {
        return 4;
    }
    (1.3 * xf / xf.ln()) as usize + 8
}

/// Λ(n): `log p` when `n` is a power of the prime `p`, zero otherwise.
pub fn von_mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let p = smallest_prime_factor(n);
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    if m == 1 {
        (p as f64).ln()
    } else {
        0.0
    }
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

/// A prime power `p^m` together with its base and exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimePower {
    pub p: u64,
    pub m: u32,
    pub value: u64,
}

/// Every prime power `<= bound`, ordered by value.
pub fn prime_powers_up_to(bound: u64) -> Vec<PrimePower> {
    if bound < 2 {
        return Vec::new();
    }
    let table = sieve_primes(bound + 1);
    let mut out = Vec::new();
    for &p in table.primes() {
        let mut value = p;
        let mut m = 1;
        loop {
            out.push(PrimePower { p, m, value });
            match value.checked_mul(p) {
                Some(v) if v <= bound => {
                    value = v;
                    m += 1;
                }
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|pp| pp.value);
    out
}
