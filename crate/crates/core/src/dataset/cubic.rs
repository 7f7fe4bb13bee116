//! Plane cubics through chosen rational points and their Weierstrass models.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::{ProjectivePoint, WeierstrassCurve};
use crate::error::{Error, Result};

/// Exponents of X, Y, Z for each coefficient slot.
pub const MONOMIALS: [[u32; 3]; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

const PENCIL_RETRIES: usize = 32;
const COMBO_BOUND: i64 = 5;

pub type Point3 = [BigInt; 3];

/// Homogeneous cubic `Σ c_i X^i Y^j Z^k` in [`MONOMIALS`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneCubic {
    pub coeffs: [BigInt; 10],
}

impl PlaneCubic {
    pub fn new(coeffs: [BigInt; 10]) -> Self {
        Self { coeffs }
    }

    pub fn from_i64(c: [i64; 10]) -> Self {
        Self { coeffs: c.map(BigInt::from) }
    }

    pub fn eval(&self, p: &Point3) -> BigInt {
        eval_generic(&self.coeffs, p)
    }

    pub fn gradient(&self, p: &Point3) -> Point3 {
        let mut g: Point3 = Default::default();
        for (c, e) in self.coeffs.iter().zip(MONOMIALS) {
            if c.is_zero() {
                continue;
            }
            for v in 0..3 {
                if e[v] == 0 {
                    continue;
                }
                let mut term = c * BigInt::from(e[v]);
                for w in 0..3 {
                    let exp = if w == v { e[w] - 1 } else { e[w] };
                    term *= p[w].pow(exp);
                }
                g[v] += term;
            }
        }
        g
    }

    fn eval_poly(&self, p: &[Poly; 3]) -> Poly {
        let mut acc = Poly::zero();
        for (c, e) in self.coeffs.iter().zip(MONOMIALS) {
            if c.is_zero() {
                continue;
            }
            let mut term = Poly::constant(c.clone());
            for v in 0..3 {
                for _ in 0..e[v] {
                    term = term.mul(&p[v]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}

fn eval_generic(coeffs: &[BigInt; 10], p: &Point3) -> BigInt {
    coeffs
        .iter()
        .zip(MONOMIALS)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, e)| c * p[0].pow(e[0]) * p[1].pow(e[1]) * p[2].pow(e[2]))
        .sum()
}

fn monomial_row(p: &Point3) -> Vec<BigInt> {
    MONOMIALS.iter().map(|e| p[0].pow(e[0]) * p[1].pow(e[1]) * p[2].pow(e[2])).collect()
}

/// Dense integer polynomial in one variable, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly(Vec<BigInt>);

impl Poly {
    fn zero() -> Self {
        Poly(Vec::new())
    }

    fn constant(c: BigInt) -> Self {
        Poly(vec![c])
    }

    fn linear(c0: BigInt, c1: BigInt) -> Self {
        Poly(vec![c0, c1])
    }

    fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    fn scale(&self, k: &BigInt) -> Poly {
        Poly(self.0.iter().map(|c| c * k).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn exact_half(&self) -> Poly {
        Poly(self.0.iter().map(|c| c / 2).collect())
    }
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot(a: &Point3, b: &Point3) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn det(a: &Point3, b: &Point3, c: &Point3) -> BigInt {
    dot(a, &cross(b, c))
}

fn is_zero3(a: &Point3) -> bool {
    a.iter().all(Zero::is_zero)
}

fn proportional(a: &Point3, b: &Point3) -> bool {
    is_zero3(&cross(a, b))
}

fn lin(l: &BigInt, a: &Point3, m: &BigInt, b: &Point3) -> Point3 {
    [l * &a[0] + m * &b[0], l * &a[1] + m * &b[1], l * &a[2] + m * &b[2]]
}

/// Divide out the content and make the first nonzero entry positive.
fn primitive(mut v: Point3) -> Point3 {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
    v
}

fn unit(i: usize) -> Point3 {
    let mut e: Point3 = Default::default();
    e[i] = BigInt::one();
    e
}

/// A cubic of the pencil through `k` random rational points.
#[derive(Clone, Debug)]
pub struct PencilCubic {
    pub k: usize,
    pub cubic: PlaneCubic,
    pub points: Vec<Point3>,
    /// Dimension of the space of cubics through the points.
    pub solution_dim: usize,
}

pub fn gen_pencil_cubic(k: usize, coord_bound: u64, seed: u64) -> Result<PencilCubic> {
    gen_pencil_cubic_with(k, coord_bound, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn gen_pencil_cubic_with<R: Rng>(k: usize, coord_bound: u64, rng: &mut R) -> Result<PencilCubic> {
    if !(2..=8).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} outside 2..=8")));
    }
    if coord_bound == 0 {
        return Err(Error::InvalidArgument("coord_bound must be positive".into()));
    }
    for _ in 0..PENCIL_RETRIES {
        match try_pencil(k, coord_bound as i64, rng) {
            Err(Error::DegenerateConfiguration) => continue,
            r => return r,
        }
    }
    Err(Error::DegenerateConfiguration)
}

fn random_point<R: Rng>(b: i64, rng: &mut R) -> Point3 {
    let (n1, d1) = (rng.gen_range(-b..=b), rng.gen_range(1..=b));
    let (n2, d2) = (rng.gen_range(-b..=b), rng.gen_range(1..=b));
    primitive([BigInt::from(n1 * d2), BigInt::from(n2 * d1), BigInt::from(d1 * d2)])
}

fn try_pencil<R: Rng>(k: usize, b: i64, rng: &mut R) -> Result<PencilCubic> {
    let mut points: Vec<Point3> = Vec::with_capacity(k);
    let mut tries = 0;
    while points.len() < k {
        tries += 1;
        if tries > 100 * k {
            return Err(Error::DegenerateConfiguration);
        }
        let p = random_point(b, rng);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let rows: Vec<Vec<BigInt>> = points.iter().map(monomial_row).collect();
    let basis = nullspace(&rows);
    if basis.len() != 10 - k {
        return Err(Error::DegenerateConfiguration);
    }
    let mut coeffs: [BigInt; 10] = Default::default();
    while coeffs.iter().all(Zero::is_zero) {
        coeffs = Default::default();
        for v in &basis {
            let m = BigInt::from(rng.gen_range(-COMBO_BOUND..=COMBO_BOUND));
            for (c, x) in coeffs.iter_mut().zip(v) {
                *c += &m * x;
            }
        }
    }
    let g = coeffs.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    for c in coeffs.iter_mut() {
        *c /= &g;
    }
    let cubic = PlaneCubic::new(coeffs);
    debug_assert!(points.iter().all(|p| cubic.eval(p).is_zero()));
    Ok(PencilCubic { k, cubic, points, solution_dim: basis.len() })
}

/// Primitive integer basis of `{x : rows · x = 0}` by exact elimination.
fn nullspace(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][f].clone();
            }
            let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            let ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
            let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            ints.into_iter().map(|x| x / &g).collect()
        })
        .collect()
}

/// Birational map from a plane cubic to `Y² = X³ + g2 X² + g1 g3 X + g0 g3²`.
///
/// `P` goes to the point at infinity. Lines through the tangential point `Q`
/// are parametrized by where they cross the coordinate line `L`; the
/// discriminant of the residual intersection is a quartic in that parameter
/// with a root at the tangent line, which gives the cubic model.
#[derive(Clone, Debug)]
pub struct WeierstrassMap {
    cubic: PlaneCubic,
    pub base: Point3,
    pub tangential: Point3,
    a: Point3,
    b: Point3,
    g3: BigInt,
}

impl WeierstrassMap {
    /// Image of a point of the cubic. `None` for the tangential point, whose
    /// image would need a limit.
    pub fn apply(&self, x: &Point3) -> Result<Option<ProjectivePoint>> {
        if !self.cubic.eval(x).is_zero() {
            return Err(Error::PointNotOnCurve);
        }
        if is_zero3(x) {
            return Err(Error::InvalidArgument("zero vector is not a projective point".into()));
        }
        let q = &self.tangential;
        if proportional(x, q) {
            return Ok(None);
        }
        let a = det(q, x, &self.a);
        let b = det(q, x, &self.b);
        if a.is_zero() {
            return Ok(Some(ProjectivePoint::infinity()));
        }
        let r = lin(&b, &self.a, &-&a, &self.b);
        let c03 = self.cubic.eval(&r);
        let f11 = self.cubic.eval(&lin(&BigInt::one(), q, &BigInt::one(), &r));
        let f1m = self.cubic.eval(&lin(&BigInt::one(), q, &-BigInt::one(), &r));
        let c21 = (&f11 - &f1m - BigInt::from(2) * &c03) / 2;
        let c12 = (&f11 + &f1m) / 2;
        let xq = cross(x, q);
        let xr = cross(x, &r);
        let i = (0..3).find(|&i| !xq[i].is_zero()).expect("x is not proportional to q");
        let ratio = BigRational::new(-xr[i].clone(), xq[i].clone());
        let s = ratio * BigRational::from_integer(BigInt::from(2) * c21) + BigRational::from_integer(c12);
        let xw = BigRational::new(-&self.g3 * &b, a.clone());
        let yw = s * BigRational::new(self.g3.clone(), &a * &a);
        Ok(Some(ProjectivePoint::from_affine(&xw, &yw)))
    }
}

pub fn cubic_to_weierstrass(cubic: &PlaneCubic, point: &Point3) -> Result<(WeierstrassCurve, WeierstrassMap)> {
    if is_zero3(point) {
        return Err(Error::InvalidArgument("zero vector is not a projective point".into()));
    }
    if !cubic.eval(point).is_zero() {
        return Err(Error::PointNotOnCurve);
    }
    let p = primitive(point.clone());
    let g = cubic.gradient(&p);
    if is_zero3(&g) {
        return Err(Error::PointAtSingularity);
    }
    // second point on the tangent line at P
    let v = (0..3)
        .map(|j| cross(&g, &unit(j)))
        .find(|v| !is_zero3(v) && !proportional(v, &p))
        .expect("tangent line has two independent points");
    // F(λP + μV) = μ²(c12 λ + c03 μ) since P is on C and V on its tangent
    let c03 = cubic.eval(&v);
    let c12 = cubic.eval(&lin(&BigInt::one(), &p, &BigInt::one(), &v)) - &c03;
    if c03.is_zero() && c12.is_zero() {
        return Err(Error::SingularCubic);
    }
    let q = primitive(lin(&c03, &p, &-c12, &v));

    let k = (0..3).find(|&k| !q[k].is_zero()).unwrap();
    let a = cross(&g, &unit(k));
    let b = (0..3)
        .filter(|&j| j != k)
        .map(unit)
        .find(|e| !proportional(e, &a))
        .expect("line L has two independent points");

    let r: [Poly; 3] = std::array::from_fn(|i| Poly::linear(a[i].clone(), b[i].clone()));
    let shift = |sign: i64| -> [Poly; 3] {
        std::array::from_fn(|i| r[i].scale(&BigInt::from(sign)).add(&Poly::constant(q[i].clone())))
    };
    let c03t = cubic.eval_poly(&r);
    let f11 = cubic.eval_poly(&shift(1));
    let f1m = cubic.eval_poly(&shift(-1));
    let c21t = f11.add(&f1m.scale(&BigInt::from(-1))).exact_half().add(&c03t.scale(&BigInt::from(-1)));
    let c12t = f11.add(&f1m).exact_half();
    let d = c12t.mul(&c12t).add(&c21t.mul(&c03t).scale(&BigInt::from(-4)));
    debug_assert!(d.coeff(0).is_zero());
    let (g3, g2, g1, g0) = (d.coeff(1), d.coeff(2), d.coeff(3), d.coeff(4));
    if g3.is_zero() {
        return Err(Error::SingularCubic);
    }
    let a4 = &g1 * &g3;
    let a6 = &g0 * &g3 * &g3;
    let curve = WeierstrassCurve::new(BigInt::zero(), g2, BigInt::zero(), a4, a6).map_err(|_| Error::SingularCubic)?;
    let map = WeierstrassMap { cubic: cubic.clone(), base: p, tangential: q, a, b, g3 };
    Ok((curve, map))
}
