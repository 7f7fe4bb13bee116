use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, FactorMap};
use crate::error::{Error, Result};

use super::local;

/// An integral Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`
/// with its standard invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeierstrassCurve {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    pub conductor: Option<BigUint>,
}

impl WeierstrassCurve {
    /// Build the model and its invariants. Fails on a singular model.
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self> {
        let inv = Invariants::of(&[a1.clone(), a2.clone(), a3.clone(), a4.clone(), a6.clone()]);
        if inv.disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(Self {
            a1,
            a2,
            a3,
            a4,
            a6,
            b2: inv.b2,
            b4: inv.b4,
            b6: inv.b6,
            b8: inv.b8,
            c4: inv.c4,
            c6: inv.c6,
            disc: inv.disc,
            conductor: None,
        })
    }

    pub fn from_ainvs(a: [i64; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
        Self::new(a1, a2, a3, a4, a6)
    }

    pub fn from_big_ainvs(a: [BigInt; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a;
        Self::new(a1, a2, a3, a4, a6)
    }

    pub fn with_conductor(mut self, conductor: BigUint) -> Self {
        self.conductor = Some(conductor);
        self
    }

    pub fn ainvs(&self) -> [BigInt; 5] {
        [self.a1.clone(), self.a2.clone(), self.a3.clone(), self.a4.clone(), self.a6.clone()]
    }

    /// j-invariant as a reduced fraction `c4^3 / disc`.
    pub fn j_invariant(&self) -> (BigInt, BigInt) {
        let num = self.c4.pow(3);
        let g = num.gcd(&self.disc);
        let (mut n, mut d) = (num / &g, &self.disc / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        (n, d)
    }

    /// `y^2 = x^3 - 27 c4 x - 54 c6`, isomorphic over Q (over Z[1/6]).
    pub fn short_model(&self) -> WeierstrassCurve {
        let z = BigInt::zero();
        Self::new(z.clone(), z.clone(), z, -BigInt::from(27) * &self.c4, -BigInt::from(54) * &self.c6)
            .expect("isomorphic model of a nonsingular curve is nonsingular")
    }

    /// The model obtained from `x = x' + r`, `y = y' + s x' + t`.
    pub fn shifted(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> WeierstrassCurve {
        let a = shift_ainvs(&self.ainvs(), r, s, t);
        let mut out = Self::from_big_ainvs(a).expect("isomorphic model of a nonsingular curve is nonsingular");
        out.conductor = self.conductor.clone();
        out
    }

    /// Factor `|disc|` within the given rho budget.
    pub fn factor_disc(&self, effort_budget: u64) -> FactorMap {
        factorize(self.disc.magnitude(), effort_budget)
    }

    /// Conductor from a complete factorization of the discriminant.
    pub fn compute_conductor(&self, effort_budget: u64) -> Result<BigUint> {
        let fac = self.factor_disc(effort_budget);
        local::conductor(self, &fac)
    }

    /// Global minimal model in reduced form (a1, a3 in {0, 1}, a2 in {-1, 0, 1}).
    pub fn minimal_model(&self, fac: &FactorMap) -> Result<WeierstrassCurve> {
        if !fac.is_complete() {
            return Err(Error::IncompleteFactorization(fac.cofactor.to_string()));
        }
        self.minimal_at(fac.primes())
    }

    /// Model that is minimal at each listed prime; other primes are left alone.
    pub fn minimal_at<'a>(&self, primes: impl IntoIterator<Item = &'a BigUint>) -> Result<WeierstrassCurve> {
        let mut u = BigInt::one();
        for p in primes {
            let k = match p.to_u64() {
                Some(2) | Some(3) => {
                    let data = local::tate(&self.ainvs(), p.to_u64().unwrap());
                    let v_disc = valuation(&self.disc, p);
                    (v_disc - data.disc_valuation) / 12
                }
                _ => {
                    let vc4 = valuation(&self.c4, p);
                    let vc6 = valuation(&self.c6, p);
                    let vd = valuation(&self.disc, p);
                    (vc4 / 4).min(vc6 / 6).min(vd / 12)
                }
            };
            if k > 0 {
                u *= BigInt::from(p.clone()).pow(k);
            }
        }
        let c4 = &self.c4 / u.pow(4);
        let c6 = &self.c6 / u.pow(6);
        let mut out = model_from_c4c6(&c4, &c6).ok_or_else(|| {
            Error::InvalidArgument("c4, c6 do not come from an integral model".into())
        })?;
        out.conductor = self.conductor.clone();
        Ok(out)
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

pub struct Invariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
}

impl Invariants {
    pub fn of(a: &[BigInt; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a;
        let b2: BigInt = a1 * a1 + 4 * a2;
        let b4: BigInt = 2 * a4 + a1 * a3;
        let b6: BigInt = a3 * a3 + 4 * a6;
        let b8: BigInt = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - 24 * &b4;
        let b2_cubed: BigInt = &b2 * &b2 * &b2;
        let c6 = -b2_cubed + 36 * &b2 * &b4 - 216 * &b6;
        let b2b2b8: BigInt = &b2 * &b2 * &b8;
        let disc = -b2b2b8 - 8 * b4.pow(3) - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6;
        Self { b2, b4, b6, b8, c4, c6, disc }
    }
}

/// Apply `x = x' + r`, `y = y' + s x' + t` to a-invariants.
pub(crate) fn shift_ainvs(a: &[BigInt; 5], r: &BigInt, s: &BigInt, t: &BigInt) -> [BigInt; 5] {
    let [a1, a2, a3, a4, a6] = a;
    let n1 = a1 + 2 * s;
    let n2 = a2 - s * a1 + 3 * r - s * s;
    let n3 = a3 + r * a1 + 2 * t;
    let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
    let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
    [n1, n2, n3, n4, n6]
}

/// Reduced integral model with the given c4, c6, when one exists.
pub fn model_from_c4c6(c4: &BigInt, c6: &BigInt) -> Option<WeierstrassCurve> {
    let twelve = BigInt::from(12);
    let mut b2 = (-c6).mod_floor(&twelve);
    if b2 > BigInt::from(6) {
        b2 -= &twelve;
    }
    let exact = |num: BigInt, den: i64| -> Option<BigInt> {
        let (q, r) = num.div_rem(&BigInt::from(den));
        r.is_zero().then_some(q)
    };
    let b4 = exact(&b2 * &b2 - c4, 24)?;
    let b6 = exact(-(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - c6, 216)?;
    let two = BigInt::from(2);
    let a1 = b2.mod_floor(&two);
    let a3 = b6.mod_floor(&two);
    let a2 = exact(&b2 - &a1, 4)?;
    let a4 = exact(&b4 - &a1 * &a3, 2)?;
    let a6 = exact(&b6 - &a3, 4)?;
    WeierstrassCurve::new(a1, a2, a3, a4, a6).ok()
}

/// p-adic valuation; `u32::MAX` stands for the valuation of zero.
pub fn valuation(x: &BigInt, p: &BigUint) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from_biguint(Sign::Plus, p.clone());
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

pub fn valuation_u64(x: &BigInt, p: u64) -> u32 {
    valuation(x, &BigUint::from(p))
}

/// `x mod p` in `[0, p)`.
pub fn residue(x: &BigInt, p: u64) -> u64 {
    let m = x.magnitude();
    let r = m
        .iter_u32_digits()
        .rev()
        .fold(0u128, |r, d| ((r << 32) | d as u128) % p as u128) as u64;
    if x.is_negative() && r != 0 {
        p - r
    } else {
        r
    }
}
