use num_bigint::BigUint;

use crate::arith::PrimeTable;
use crate::curve::ApRecord;
use crate::error::{Error, Result};
use crate::sums::ln_big;

/// Network input of shape `3 × cols`, row-major.
///
/// Row 0 holds `a_p/√p`, row 1 the constant `ln N_E / ln N_max`, row 2 the
/// position sweep `-1 + 2n/cols`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    pub const ROWS: usize = 3;

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn shape(&self) -> (usize, usize) {
        (Self::ROWS, self.cols)
    }
}

/// `ln N / ln N_max`, the normalized conductor shared by both model families.
pub fn conductor_feature(conductor: &BigUint, n_max: &BigUint) -> Result<f64> {
    if n_max <= &BigUint::from(1u8) {
        return Err(Error::InvalidArgument("N_max must exceed 1".into()));
    }
    if conductor > n_max {
        return Err(Error::ConductorExceedsMax { conductor: conductor.to_string(), max: n_max.to_string() });
    }
    Ok(ln_big(conductor) / ln_big(n_max))
}

/// Features over every prime of `table`; the a_p record must cover them all.
pub fn build_feature_matrix(
    conductor: &BigUint,
    ap: &ApRecord,
    table: &PrimeTable,
    n_max: &BigUint,
) -> Result<FeatureMatrix> {
    let cols = table.len();
    if cols == 0 {
        return Err(Error::InvalidArgument("prime table is empty".into()));
    }
    if ap.ap.len() < cols {
        return Err(Error::InsufficientApData { required: table.bound(), available: ap.bound() });
    }
    let c = conductor_feature(conductor, n_max)?;
    let mut data = Vec::with_capacity(3 * cols);
    data.extend(ap.ap[..cols].iter().zip(table.primes()).map(|(&a, &p)| a as f64 / (p as f64).sqrt()));
    data.extend(std::iter::repeat(c).take(cols));
    let n = cols as f64;
    data.extend((1..=cols).map(|i| -1.0 + 2.0 * i as f64 / n));
    Ok(FeatureMatrix { cols, data })
}
