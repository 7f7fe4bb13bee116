//! Chord-tangent group law in exact rational arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::weierstrass::WeierstrassCurve;

/// `(X : Y : Z)` with `x = X/Z`, `y = Y/Z`, coprime entries, `Z > 0`
/// for affine points and `(0 : 1 : 0)` for the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectivePoint {
    pub x: BigInt,
    pub y: BigInt,
    pub z: BigInt,
}

impl ProjectivePoint {
    pub fn infinity() -> Self {
        Self { x: BigInt::zero(), y: BigInt::one(), z: BigInt::zero() }
    }

    /// Canonicalizes `(x : y : z)`. Fails when all three are zero.
    pub fn new(x: BigInt, y: BigInt, z: BigInt) -> Result<Self> {
        if x.is_zero() && y.is_zero() && z.is_zero() {
            return Err(Error::InvalidArgument("(0 : 0 : 0) is not a projective point".into()));
        }
        let g = x.gcd(&y).gcd(&z);
        let (mut x, mut y, mut z) = (x / &g, y / &g, z / &g);
        if z.is_negative() || (z.is_zero() && y.is_negative()) {
            x = -x;
            y = -y;
            z = -z;
        }
        Ok(Self { x, y, z })
    }

    pub fn from_affine(x: &BigRational, y: &BigRational) -> Self {
        let z = x.denom().lcm(y.denom());
        let px = x.numer() * (&z / x.denom());
        let py = y.numer() * (&z / y.denom());
        Self::new(px, py, z).expect("z is nonzero")
    }

    pub fn from_integers(x: i64, y: i64) -> Self {
        Self { x: x.into(), y: y.into(), z: BigInt::one() }
    }

    pub fn is_infinity(&self) -> bool {
        self.z.is_zero()
    }

    /// Affine coordinates, `None` at infinity.
    pub fn affine(&self) -> Option<(BigRational, BigRational)> {
        if self.is_infinity() {
            return None;
        }
        Some((
            BigRational::new(self.x.clone(), self.z.clone()),
            BigRational::new(self.y.clone(), self.z.clone()),
        ))
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {})", self.x, self.y, self.z)
    }
}

struct Coeffs {
    a1: BigRational,
    a2: BigRational,
    a3: BigRational,
    a4: BigRational,
    a6: BigRational,
}

impl Coeffs {
    fn of(c: &WeierstrassCurve) -> Self {
        let r = |a: &BigInt| BigRational::from_integer(a.clone());
        Self { a1: r(&c.a1), a2: r(&c.a2), a3: r(&c.a3), a4: r(&c.a4), a6: r(&c.a6) }
    }

    fn on_curve(&self, x: &BigRational, y: &BigRational) -> bool {
        let lhs = y * y + &self.a1 * x * y + &self.a3 * y;
        let rhs = x * x * x + &self.a2 * x * x + &self.a4 * x + &self.a6;
        lhs == rhs
    }

    fn neg(&self, x: &BigRational, y: &BigRational) -> BigRational {
        -y - &self.a1 * x - &self.a3
    }

    fn add(&self, p: &(BigRational, BigRational), q: &(BigRational, BigRational)) -> Option<(BigRational, BigRational)> {
        let ((x1, y1), (x2, y2)) = (p, q);
        let (lambda, nu) = if x1 == x2 {
            let den = y1 * BigInt::from(2) + &self.a1 * x1 + &self.a3;
            if den.is_zero() || (y1 + y2 + &self.a1 * x2 + &self.a3).is_zero() {
                return None;
            }
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            let lam = (three * x1 * x1 + &two * &self.a2 * x1 + &self.a4 - &self.a1 * y1) / &den;
            let nu = (-(x1 * x1 * x1) + &self.a4 * x1 + two * &self.a6 - &self.a3 * y1) / &den;
            (lam, nu)
        } else {
            let dx = x2 - x1;
            ((y2 - y1) / &dx, (y1 * x2 - y2 * x1) / &dx)
        };
        let x3 = &lambda * &lambda + &self.a1 * &lambda - &self.a2 - x1 - x2;
        let y3 = -(&lambda + &self.a1) * &x3 - nu - &self.a3;
        Some((x3, y3))
    }
}

pub fn point_on_curve(curve: &WeierstrassCurve, point: &ProjectivePoint) -> bool {
    match point.affine() {
        None => true,
        Some((x, y)) => Coeffs::of(curve).on_curve(&x, &y),
    }
}

fn checked_affine(c: &Coeffs, p: &ProjectivePoint) -> Result<Option<(BigRational, BigRational)>> {
    match p.affine() {
        None => Ok(None),
        Some((x, y)) if c.on_curve(&x, &y) => Ok(Some((x, y))),
        Some(_) => Err(Error::PointNotOnCurve),
    }
}

fn to_point(a: Option<(BigRational, BigRational)>) -> ProjectivePoint {
    match a {
        None => ProjectivePoint::infinity(),
        Some((x, y)) => ProjectivePoint::from_affine(&x, &y),
    }
}

pub fn point_neg(curve: &WeierstrassCurve, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    let c = Coeffs::of(curve);
    Ok(to_point(checked_affine(&c, p)?.map(|(x, y)| {
        let ny = c.neg(&x, &y);
        (x, ny)
    })))
}

pub fn point_add(curve: &WeierstrassCurve, p: &ProjectivePoint, q: &ProjectivePoint) -> Result<ProjectivePoint> {
    let c = Coeffs::of(curve);
    let out = match (checked_affine(&c, p)?, checked_affine(&c, q)?) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => c.add(&a, &b),
    };
    Ok(to_point(out))
}

/// `n P` by double-and-add; negative `n` uses `-P`.
pub fn scalar_mul(curve: &WeierstrassCurve, n: i64, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    let c = Coeffs::of(curve);
    let mut base = checked_affine(&c, p)?;
    if n < 0 {
        base = base.map(|(x, y)| {
            let ny = c.neg(&x, &y);
            (x, ny)
        });
    }
    let mut k = n.unsigned_abs();
    let mut acc: Option<(BigRational, BigRational)> = None;
    while k > 0 {
        if k & 1 == 1 {
            acc = match (&acc, &base) {
                (None, b) => b.clone(),
                (a, None) => a.clone(),
                (Some(a), Some(b)) => c.add(a, b),
            };
        }
        k >>= 1;
        if k > 0 {
            base = base.as_ref().and_then(|b| c.add(b, b));
        }
    }
    Ok(to_point(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn multiples_on_37a1() {
        let e = WeierstrassCurve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let p = ProjectivePoint::from_integers(0, 0);
        let expected = [(1, 1, 0, 1), (-1, 1, -1, 1), (2, 1, -3, 1), (1, 4, -5, 8), (6, 1, 14, 1)];
        for (k, &(xn, xd, yn, yd)) in (2..).zip(expected.iter()) {
            let m = scalar_mul(&e, k, &p).unwrap();
            assert_eq!(m.affine().unwrap(), (q(xn, xd), q(yn, yd)), "{k}P");
            assert!(point_on_curve(&e, &m));
        }
        // 5P in projective form: (1/4, -5/8) -> (2 : -5 : 8)
        let five = scalar_mul(&e, 5, &p).unwrap();
        assert_eq!(five, ProjectivePoint::new(2.into(), (-5).into(), 8.into()).unwrap());
    }

    #[test]
    fn identity_and_inverse() {
        let e = WeierstrassCurve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let p = scalar_mul(&e, 3, &ProjectivePoint::from_integers(0, 0)).unwrap();
        let o = ProjectivePoint::infinity();
        assert_eq!(point_add(&e, &p, &o).unwrap(), p);
        assert_eq!(point_add(&e, &o, &p).unwrap(), p);
        let np = point_neg(&e, &p).unwrap();
        assert!(point_add(&e, &p, &np).unwrap().is_infinity());
        assert_eq!(scalar_mul(&e, -3, &ProjectivePoint::from_integers(0, 0)).unwrap(), np);
        assert!(scalar_mul(&e, 0, &p).unwrap().is_infinity());
    }

    #[test]
    fn torsion_orders() {
        let e = WeierstrassCurve::from_ainvs([0, 0, 0, -1, 0]).unwrap();
        let t = ProjectivePoint::from_integers(0, 0);
        assert!(scalar_mul(&e, 2, &t).unwrap().is_infinity());
        let e = WeierstrassCurve::from_ainvs([0, 0, 1, 0, 0]).unwrap();
        let t = ProjectivePoint::from_integers(0, 0);
        assert!(!scalar_mul(&e, 2, &t).unwrap().is_infinity());
        assert!(scalar_mul(&e, 3, &t).unwrap().is_infinity());
    }

    #[test]
    fn rejects_points_off_the_curve() {
        let e = WeierstrassCurve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let bad = ProjectivePoint::from_integers(1, 1);
        assert!(!point_on_curve(&e, &bad));
        assert!(matches!(point_add(&e, &bad, &bad), Err(Error::PointNotOnCurve)));
        assert!(matches!(scalar_mul(&e, 2, &bad), Err(Error::PointNotOnCurve)));
    }

    #[test]
    fn canonical_form() {
        let p = ProjectivePoint::new((-4).into(), 10.into(), (-16).into()).unwrap();
        assert_eq!((p.x, p.y, p.z), (2.into(), (-5).into(), 8.into()));
        let o = ProjectivePoint::new(0.into(), (-3).into(), 0.into()).unwrap();
        assert_eq!(o, ProjectivePoint::infinity());
        assert!(ProjectivePoint::new(0.into(), 0.into(), 0.into()).is_err());
    }
}
