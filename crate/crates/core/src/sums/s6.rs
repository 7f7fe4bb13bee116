use std::f64::consts::PI;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::arith::digamma_complex;
use crate::curve::ApRecord;
use crate::error::{Error, Result};

use super::Kahan;

/// Largest Δ accepted; e^{6π} ≈ 1.5e8 is already far beyond practical a_p tables.
pub const MAX_DELTA: f64 = 3.0;

const PANEL_TOL: f64 = 1e-13;
const MAX_DEPTH: u32 = 40;

/// Bober's explicit-formula sum `S6(Δ)` with the default panel width `0.5/Δ`.
pub fn s6(rec: &ApRecord, conductor: &BigUint, delta: f64) -> Result<f64> {
    s6_with_step(rec, conductor, delta, 0.5 / delta)
}

/// `S6(Δ)` with an explicit quadrature panel width.
pub fn s6_with_step(rec: &ApRecord, conductor: &BigUint, delta: f64, step: f64) -> Result<f64> {
    check_delta(delta)?;
    let x = 2.0 * PI * delta;
    let prime_sum = prime_sum(rec, x)?;
    let log_n = ln_big(conductor);
    Ok(log_n / (2.0 * delta * PI) - (2.0 * PI).ln() / (delta * PI) - prime_sum / (delta * PI)
        + digamma_integral(delta, step)?)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= MAX_DELTA {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

pub(crate) fn ln_big(n: &BigUint) -> f64 {
    match n.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let shift = n.bits() - 64;
            ((n >> shift).to_f64().unwrap()).ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// `Σ_{p^k ≤ e^x} log p · c_{p^k} p^{−k} (1 − k log p / x)`.
///
/// `c_{p^k}` here is unnormalized (`|α_p| = √p`); dividing by `p^k` is the
/// same as the normalized coefficient over `p^{k/2}`.
fn prime_sum(rec: &ApRecord, x: f64) -> Result<f64> {
    let limit = x.exp().floor() as u64;
    rec.require_primes_up_to(limit)?;
    let mut total = Kahan::default();
    for (p, a, red) in rec.iter() {
        let lp = (p as f64).ln();
        if lp > x {
            break;
        }
        let kmax = (x / lp).floor() as u32;
        let good = red.bad_ap().is_none();
        let (a, pf) = (a as f64, p as f64);
        let (mut prev, mut cur) = (2.0, a);
        for k in 1..=kmax {
            total.add(lp * cur * pf.powi(-(k as i32)) * (1.0 - k as f64 * lp / x));
            let next = if good { cur * a - pf * prev } else { cur * a };
            prev = cur;
            cur = next;
        }
    }
    Ok(total.value())
}

fn integrand(t: f64, a: f64) -> f64 {
    let re_psi = digamma_complex(Complex64::new(1.0, t)).expect("Re = 1").re;
    let u = a * t;
    let sinc = if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
    re_psi * sinc * sinc
}

/// `(1/π) Re ∫_ℝ ψ(1+it) (sin(Δπt)/(Δπt))² dt`.
///
/// `[0, 200/Δ]` is cut into panels of width about `step`, each integrated by
/// adaptive Simpson; the rest uses `Re ψ(1+it) ≈ log t + 1/(12t²) + 1/(120t⁴)`
/// with two integrations by parts for the oscillating part.
pub fn digamma_integral(delta: f64, step: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("quadrature step {step} must be positive")));
    }
    let a = delta * PI;
    let t_max = 200.0 / delta;
    let panels = (t_max / step).ceil().max(1.0) as usize;
    let h = t_max / panels as f64;
    let f = |t: f64| integrand(t, a);
    let mut body = Kahan::default();
    for i in 0..panels {
        let (lo, hi) = (i as f64 * h, (i + 1) as f64 * h);
        body.add(adaptive_simpson(&f, lo, hi, PANEL_TOL));
    }
    Ok(2.0 / PI * (body.value() + tail(a, t_max)))
}

fn tail(a: f64, t: f64) -> f64 {
    let w = 2.0 * a;
    let lt = t.ln();
    let smooth = (lt + 1.0) / t + 1.0 / (36.0 * t.powi(3)) + 1.0 / (600.0 * t.powi(5));
    // g(t) = h(t)/t^2 and its derivative, h(t) = log t + 1/(12 t^2)
    let g = lt / (t * t) + 1.0 / (12.0 * t.powi(4));
    let dg = (1.0 - 2.0 * lt) / t.powi(3) - 1.0 / (3.0 * t.powi(5));
    let oscill = -g * (w * t).sin() / w - dg * (w * t).cos() / (w * w);
    (smooth - oscill) / (2.0 * a * a)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
