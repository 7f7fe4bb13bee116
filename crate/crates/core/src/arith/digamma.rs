use num_complex::Complex64;

use crate::error::{Error, Result};

// B_2k for k = 1..=8
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// ψ(z) = Γ'(z)/Γ(z) on the half plane `Re z >= 1`.
///
/// Shifts upward with ψ(z) = ψ(z+1) - 1/z until |z| >= 10 and then sums the
/// asymptotic series. Absolute error stays below 1e-12 on that half plane.
pub fn digamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re >= 1.0) || !z.im.is_finite() {
        return Err(Error::InvalidArgument(format!("digamma needs Re(z) >= 1, got {z}")));
    }
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 10.0 {
        shift -= z.inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = w2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        series += pow * (*b / (2.0 * (k as f64 + 1.0)));
        pow *= w2;
    }
    Ok(shift + z.ln() - 0.5 * w - series)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

    /// Independent route: Re ψ(1+it) = -γ + Σ t²/(n(n²+t²)), summed to M
    /// terms with an Euler-Maclaurin tail; Im ψ(1+it) = -1/(2t) + (π/2)coth(πt).
    fn oracle(t: f64) -> Complex64 {
        let m = 200_000u64;
        let t2 = t * t;
        let f = |n: f64| t2 / (n * (n * n + t2));
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for n in (1..=m).rev() {
            let y = f(n as f64) - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        let mf = m as f64;
        let fprime = -t2 * (3.0 * mf * mf + t2) / (mf * mf * (mf * mf + t2).powi(2));
        let tail = 0.5 * (1.0 + t2 / (mf * mf)).ln() - f(mf) / 2.0 - fprime / 12.0;
        let re = -EULER_GAMMA + sum + tail;
        let im = if t == 0.0 {
            0.0
        } else {
            -1.0 / (2.0 * t) + std::f64::consts::FRAC_PI_2 / (std::f64::consts::PI * t).tanh()
        };
        Complex64::new(re, im)
    }

    #[test]
    fn psi_at_one_and_two() {
        let one = digamma_complex(Complex64::new(1.0, 0.0)).unwrap();
        assert!((one.re + EULER_GAMMA).abs() < 1e-14, "{one}");
        assert!(one.im.abs() < 1e-15);
        let two = digamma_complex(Complex64::new(2.0, 0.0)).unwrap();
        assert!((two.re - (1.0 - EULER_GAMMA)).abs() < 1e-14);
    }

    #[test]
    fn conjugate_symmetry() {
        let z = Complex64::new(1.0, 1.5);
        let a = digamma_complex(z).unwrap();
        let b = digamma_complex(z.conj()).unwrap();
        assert!((a.conj() - b).norm() < 1e-15);
    }

    #[test]
    fn rejects_left_half_plane() {
        assert!(digamma_complex(Complex64::new(0.5, 1.0)).is_err());
        assert!(digamma_complex(Complex64::new(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn matches_series_oracle_on_critical_grid() {
        for i in 0..=100 {
            let t = i as f64 * 0.5;
            let got = digamma_complex(Complex64::new(1.0, t)).unwrap();
            let want = oracle(t);
            assert!((got - want).norm() < 1e-11, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn recurrence_residual() {
        for i in 0..=500 {
            let z = Complex64::new(1.0, i as f64 * 0.1);
            let lhs = digamma_complex(z + 1.0).unwrap() - digamma_complex(z).unwrap();
            assert!((lhs - z.inv()).norm() <= 1e-12, "z={z}");
        }
    }
}
