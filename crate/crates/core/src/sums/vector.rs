use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::curve::ApRecord;
use crate::error::{Error, Result};

use super::{s0, s1, s2, s3, s4, s5, s6};

/// S0..S5 at bound `b` and S6 at `delta`; `s6` is `None` when the a_p
/// data does not reach `e^{2πΔ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumVector {
    pub b: u64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
    pub delta: f64,
    pub s6: Option<f64>,
}

impl SumVector {
    pub const NAMES: [&'static str; 7] = ["S0", "S1", "S2", "S3", "S4", "S5", "S6"];

    /// Sum `i` (0..=6); S6 reads as NaN when absent.
    pub fn get(&self, i: usize) -> f64 {
        match i {
            0 => self.s0,
            1 => self.s1,
            2 => self.s2,
            3 => self.s3,
            4 => self.s4,
            5 => self.s5,
            6 => self.s6.unwrap_or(f64::NAN),
            _ => panic!("sum index {i} out of range"),
        }
    }

    pub fn as_array(&self) -> [f64; 7] {
        std::array::from_fn(|i| self.get(i))
    }
}

pub fn sum_vector(rec: &ApRecord, conductor: &BigUint, b: u64, delta: f64) -> Result<SumVector> {
    let s6 = match s6(rec, conductor, delta) {
        Ok(v) => Some(v),
        Err(Error::InsufficientApData { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(SumVector {
        b,
        s0: s0(rec, b)?,
        s1: s1(rec, b)?,
        s2: s2(rec, b)?,
        s3: s3(rec, b)?,
        s4: s4(rec, b)?,
        s5: s5(rec, b)?,
        delta,
        s6,
    })
}
