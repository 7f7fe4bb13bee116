//! Local reduction data: Kodaira symbol, conductor exponent, reduction type
//! and p-minimal model.
//!
//! Primes 2 and 3 go through Tate's algorithm. For p >= 5 the valuations of
//! (c4, c6, disc) decide everything, which also works for primes far beyond
//! 64 bits when only the conductor is wanted.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, legendre_symbol, mul_mod, FactorMap};
use crate::error::{Error, Result};

use super::weierstrass::{residue, shift_ainvs, valuation, valuation_u64, Invariants, WeierstrassCurve};

/// Behaviour of a curve modulo a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReductionType {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionType {
    /// a_p at a bad prime: 1 split, -1 non-split, 0 additive.
    pub fn bad_ap(self) -> Option<i32> {
        match self {
            ReductionType::Good => None,
            ReductionType::SplitMultiplicative => Some(1),
            ReductionType::NonsplitMultiplicative => Some(-1),
            ReductionType::Additive => Some(0),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            ReductionType::Good => 0,
            ReductionType::SplitMultiplicative => 1,
            ReductionType::NonsplitMultiplicative => 2,
            ReductionType::Additive => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => ReductionType::Good,
            1 => ReductionType::SplitMultiplicative,
            2 => ReductionType::NonsplitMultiplicative,
            3 => ReductionType::Additive,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kodaira {
    I0,
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// The integer code PARI/GP uses for Kodaira symbols.
    pub fn pari_code(self) -> i32 {
        match self {
            Kodaira::I0 => 1,
            Kodaira::II => 2,
            Kodaira::III => 3,
            Kodaira::IV => 4,
            Kodaira::In(n) => 4 + n as i32,
            Kodaira::I0Star => -1,
            Kodaira::IIStar => -2,
            Kodaira::IIIStar => -3,
            Kodaira::IVStar => -4,
            Kodaira::InStar(n) => -4 - n as i32,
        }
    }
}

/// Output of Tate's algorithm at one prime.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub p: u64,
    pub kodaira: Kodaira,
    pub conductor_exponent: u32,
    pub tamagawa: u32,
    pub reduction: ReductionType,
    /// a-invariants of a p-minimal model.
    pub minimal: [BigInt; 5],
    /// Valuation of the minimal discriminant.
    pub disc_valuation: u32,
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

fn divides(p: u64, x: &BigInt) -> bool {
    residue(x, p) == 0
}

fn count_roots_mod(coeffs: &[BigInt], p: u64) -> usize {
    // coeffs from the leading term down
    let c: Vec<u64> = coeffs.iter().map(|x| residue(x, p)).collect();
    (0..p)
        .filter(|&t| c.iter().fold(0u64, |acc, &ci| (acc * t + ci) % p) == 0)
        .count()
}

/// Tate's algorithm at a small prime `p` (roots are found by enumeration, so
/// keep `p` modest; production code only calls it for 2 and 3).
pub fn tate(ainvs: &[BigInt; 5], p: u64) -> LocalData {
    assert!(p < (1 << 20), "tate() enumerates residues; p = {p} is too large");
    let pb = big(p);
    let inv2 = if p == 2 { 0 } else { inv_mod(2, p).unwrap() };
    let mut a = ainvs.clone();
    loop {
        let inv = Invariants::of(&a);
        let n = valuation_u64(&inv.disc, p);
        let done = |kodaira, f, tamagawa, reduction, a: [BigInt; 5]| LocalData {
            p,
            kodaira,
            conductor_exponent: f,
            tamagawa,
            reduction,
            minimal: a,
            disc_valuation: n,
        };
        if n == 0 {
            return done(Kodaira::I0, 0, 1, ReductionType::Good, a);
        }
        // Move the singular point of the reduction to (0, 0).
        let (r, t) = if p == 2 {
            if divides(2, &inv.b2) {
                let r = residue(&a[3], 2);
                let t = residue(&(big(r) * (1 + &a[1] + &a[3]) + &a[4]), 2);
                (r, t)
            } else {
                let r = residue(&a[2], 2);
                let t = residue(&(big(r) + &a[3]), 2);
                (r, t)
            }
        } else if p == 3 {
            let r = if divides(3, &inv.b2) { residue(&-&inv.b6, 3) } else { residue(&(-&inv.b2 * &inv.b4), 3) };
            let t = residue(&(&a[0] * big(r) + &a[2]), 3);
            (r, t)
        } else {
            let inv12 = inv_mod(12, p).unwrap();
            let r = if divides(p, &inv.c4) {
                residue(&(-&inv.b2 * big(inv12)), p)
            } else {
                let denom = inv_mod(residue(&(BigInt::from(12) * &inv.c4), p), p).unwrap();
                residue(&(-(&inv.c6 + &inv.b2 * &inv.c4) * big(denom)), p)
            };
            let t = residue(&(-(&a[0] * big(r) + &a[2]) * big(inv2)), p);
            (r, t)
        };
        a = shift_ainvs(&a, &big(r), &BigInt::zero(), &big(t));
        let inv = Invariants::of(&a);

        if !divides(p, &inv.c4) {
            let split = count_roots_mod(&[BigInt::from(1), a[0].clone(), -&a[1]], p) > 0;
            let (cp, red) = if split {
                (n, ReductionType::SplitMultiplicative)
            } else {
                (if n % 2 == 0 { 2 } else { 1 }, ReductionType::NonsplitMultiplicative)
            };
            return done(Kodaira::In(n), 1, cp, red, a);
        }
        if valuation_u64(&a[4], p) < 2 {
            return done(Kodaira::II, n, 1, ReductionType::Additive, a);
        }
        if valuation_u64(&inv.b8, p) < 3 {
            return done(Kodaira::III, n - 1, 2, ReductionType::Additive, a);
        }
        if valuation_u64(&inv.b6, p) < 3 {
            let roots = count_roots_mod(&[BigInt::from(1), &a[2] / &pb, -&a[4] / (&pb * &pb)], p);
            let cp = if roots > 0 { 3 } else { 1 };
            return done(Kodaira::IV, n - 2, cp, ReductionType::Additive, a);
        }

        // Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
        let (s, t) = if p == 2 {
            (residue(&a[1], 2), big(2 * residue(&(&a[4] / BigInt::from(4)), 2)))
        } else {
            (residue(&(-&a[0] * big(inv2)), p), big(residue(&(-(&a[2] / &pb) * big(inv2)), p)) * &pb)
        };
        a = shift_ainvs(&a, &BigInt::zero(), &big(s), &t);

        let p2 = &pb * &pb;
        let p3 = &p2 * &pb;
        let b = &a[1] / &pb;
        let c = &a[3] / &p2;
        let d = &a[4] / &p3;
        let w = 27 * &d * &d - &b * &b * &c * &c + 4 * b.pow(3) * &d - 18 * &b * &c * &d + 4 * c.pow(3);
        let x = 3 * &c - &b * &b;

        if !divides(p, &w) {
            let roots = count_roots_mod(&[BigInt::from(1), b, c, d], p);
            return done(Kodaira::I0Star, n - 4, 1 + roots as u32, ReductionType::Additive, a);
        }

        if !divides(p, &x) {
            // Double root of the auxiliary cubic: move it to 0.
            let r = if p == 2 {
                residue(&c, 2)
            } else if p == 3 {
                residue(&(&b * &c), 3)
            } else {
                let den = inv_mod(residue(&(2 * &x), p), p).unwrap();
                residue(&((&b * &c - 9 * &d) * big(den)), p)
            };
            a = shift_ainvs(&a, &(big(r) * &pb), &BigInt::zero(), &BigInt::zero());
            let (mut ix, mut iy) = (3u32, 3u32);
            let (mut mx, mut my) = (p2.clone(), p2.clone());
            let cp;
            loop {
                let xa3 = &a[2] / &my;
                let xa6 = &a[4] / (&mx * &my);
                if !divides(p, &(&xa3 * &xa3 + 4 * &xa6)) {
                    let roots = count_roots_mod(&[BigInt::from(1), xa3, -xa6], p);
                    cp = if roots > 0 { 4 } else { 2 };
                    break;
                }
                let t = if p == 2 { &my * &xa6 } else { &my * big(residue(&(-&xa3 * big(inv2)), p)) };
                a = shift_ainvs(&a, &BigInt::zero(), &BigInt::zero(), &t);
                my *= &pb;
                iy += 1;

                let xa2 = &a[1] / &pb;
                let xa4 = &a[3] / (&pb * &mx);
                let xa6 = &a[4] / (&mx * &my);
                if !divides(p, &(&xa4 * &xa4 - 4 * &xa2 * &xa6)) {
                    let roots = count_roots_mod(&[xa2, xa4, xa6], p);
                    cp = if roots > 0 { 4 } else { 2 };
                    break;
                }
                let r = if p == 2 {
                    &mx * big(residue(&(&xa6 * &xa2), 2))
                } else {
                    let den = inv_mod(residue(&(2 * &xa2), p), p).unwrap();
                    &mx * big(residue(&(-&xa4 * big(den)), p))
                };
                a = shift_ainvs(&a, &r, &BigInt::zero(), &BigInt::zero());
                mx *= &pb;
                ix += 1;
            }
            let m = ix + iy - 5;
            return done(Kodaira::InStar(m), n - m - 4, cp, ReductionType::Additive, a);
        }

        // Triple root: move it to 0.
        let r = if p == 2 {
            residue(&b, 2)
        } else if p == 3 {
            residue(&-&d, 3)
        } else {
            let inv3 = inv_mod(3, p).unwrap();
            residue(&(-&b * big(inv3)), p)
        };
        a = shift_ainvs(&a, &(big(r) * &pb), &BigInt::zero(), &BigInt::zero());
        let x3 = &a[2] / &p2;
        let x6 = &a[4] / (&p2 * &p2);
        if !divides(p, &(&x3 * &x3 + 4 * &x6)) {
            let roots = count_roots_mod(&[BigInt::from(1), x3, -x6], p);
            let cp = if roots > 0 { 3 } else { 1 };
            return done(Kodaira::IVStar, n - 6, cp, ReductionType::Additive, a);
        }
        let t = if p == 2 { residue(&x6, 2) } else { residue(&(-&x3 * big(inv2)), p) };
        a = shift_ainvs(&a, &BigInt::zero(), &BigInt::zero(), &(big(t) * &p2));
        if valuation_u64(&a[3], p) < 4 {
            return done(Kodaira::IIIStar, n - 7, 2, ReductionType::Additive, a);
        }
        if valuation_u64(&a[4], p) < 6 {
            return done(Kodaira::IIStar, n - 8, 1, ReductionType::Additive, a);
        }
        // Not minimal: scale by u = p and start over.
        for (ai, e) in a.iter_mut().zip([1u32, 2, 3, 4, 6]) {
            *ai = &*ai / pb.pow(e);
        }
    }
}

/// Local data at p >= 5 read off the valuations of c4, c6 and disc.
#[derive(Clone, Debug)]
pub struct LargePrimeData {
    pub conductor_exponent: u32,
    /// Valuation of the minimal discriminant.
    pub disc_valuation: u32,
    /// c4, c6 of a p-minimal model.
    pub c4: BigInt,
    pub c6: BigInt,
}

pub fn large_prime_data(curve: &WeierstrassCurve, p: &BigUint) -> LargePrimeData {
    let mut vc4 = valuation(&curve.c4, p);
    let vc6 = valuation(&curve.c6, p);
    let mut vd = valuation(&curve.disc, p);
    let k = (vc4 / 4).min(vc6 / 6).min(vd / 12);
    let pk = BigInt::from(p.clone()).pow(k);
    let c4 = &curve.c4 / pk.pow(4);
    let c6 = &curve.c6 / pk.pow(6);
    if vc4 != u32::MAX {
        vc4 -= 4 * k;
    }
    vd -= 12 * k;
    let f = if vd == 0 {
        0
    } else if vc4 == 0 {
        1
    } else {
        2
    };
    LargePrimeData { conductor_exponent: f, disc_valuation: vd, c4, c6 }
}

/// Reduction type and a_p at a bad prime.
///
/// For p >= 5 the node/cusp of `y^2 = x^3 - 27 c4 x - 54 c6` on a p-minimal
/// model decides split versus non-split by the tangent slopes at the node.
pub fn reduction_type(curve: &WeierstrassCurve, p: u64) -> Result<(ReductionType, i32)> {
    let red = if p == 2 || p == 3 {
        tate(&curve.ainvs(), p).reduction
    } else {
        let data = large_prime_data(curve, &BigUint::from(p));
        if data.disc_valuation == 0 {
            ReductionType::Good
        } else {
            node_type(&data.c4, &data.c6, p)
        }
    };
    match red.bad_ap() {
        Some(ap) => Ok((red, ap)),
        None => Err(Error::GoodReductionPrime(p)),
    }
}

/// Classify the singular point of `y^2 = x^3 + A x + B` mod p (p >= 5), where
/// A = -27 c4 and B = -54 c6.
fn node_type(c4: &BigInt, c6: &BigInt, p: u64) -> ReductionType {
    let a = residue(&(BigInt::from(-27) * c4), p);
    let b = residue(&(BigInt::from(-54) * c6), p);
    if a == 0 {
        return ReductionType::Additive;
    }
    // Double root x0 = -3B / (2A); tangent cone y^2 = 3 x0 (x - x0)^2.
    let x0 = mul_mod(
        (p - mul_mod(3, b, p)) % p,
        inv_mod(mul_mod(2, a, p), p).expect("p >= 5 and A != 0"),
        p,
    );
    let slope_sq = mul_mod(3, x0, p);
    match legendre_symbol(slope_sq as i64, p).expect("odd prime") {
        0 => ReductionType::Additive,
        1 => ReductionType::SplitMultiplicative,
        _ => ReductionType::NonsplitMultiplicative,
    }
}

/// Conductor `prod p^f_p` from a complete factorization of the discriminant.
pub fn conductor(curve: &WeierstrassCurve, factored_disc: &FactorMap) -> Result<BigUint> {
    if !factored_disc.is_complete() {
        return Err(Error::IncompleteFactorization(factored_disc.cofactor.to_string()));
    }
    let mut n = BigUint::from(1u32);
    for p in factored_disc.primes() {
        let f = match p.to_u64() {
            Some(small @ (2 | 3)) => tate(&curve.ainvs(), small).conductor_exponent,
            _ => large_prime_data(curve, p).conductor_exponent,
        };
        n *= p.pow(f);
    }
    Ok(n)
}
