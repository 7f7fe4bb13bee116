//! Mestre–Nagao sums S0–S6, the c_n coefficients and the partial Euler product.

mod cn;
mod mestre;
mod s6;
mod vector;

pub use cn::{cn_table, CnEntry, CnTable};
pub use mestre::{partial_euler_product, s0, s1, s2, s3, s4, s5};
pub use s6::{digamma_integral, s6, s6_with_step, MAX_DELTA};
pub(crate) use s6::ln_big;
pub use vector::{sum_vector, SumVector};

/// Compensated (Kahan–Babuška) accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for Kahan {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut k = Kahan::default();
        iter.for_each(|x| k.add(x));
        k
    }
}
