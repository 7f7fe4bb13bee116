use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::CurveRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SplitMode {
    Uniform { test_fraction: f64 },
    /// Test set is every conductor in `[lo, hi)`; conductors at or above `hi` are left out entirely.
    TopRange { lo: BigUint, hi: BigUint },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub train_parts: u32,
    pub val_parts: u32,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { mode: SplitMode::Uniform { test_fraction: 0.2 }, train_parts: 4, val_parts: 1, seed: 0 }
    }
}

/// Indices into the input slice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl DatasetSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }

    pub fn select<'a, T>(idx: &[usize], items: &'a [T]) -> Vec<&'a T> {
        idx.iter().map(|&i| &items[i]).collect()
    }
}

pub fn split_dataset(records: &[CurveRecord], spec: &SplitSpec) -> Result<DatasetSplit> {
    let conductors: Vec<&BigUint> = records.iter().map(|r| &r.conductor).collect();
    split_by_conductor(&conductors, spec)
}

pub fn split_by_conductor(conductors: &[&BigUint], spec: &SplitSpec) -> Result<DatasetSplit> {
    if conductors.is_empty() {
        return Err(Error::InvalidArgument("cannot split an empty dataset".into()));
    }
    if spec.train_parts == 0 || spec.val_parts == 0 {
        return Err(Error::InvalidArgument("train and validation parts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (test, mut rest) = match &spec.mode {
        SplitMode::Uniform { test_fraction } => {
            if !(0.0..1.0).contains(test_fraction) {
                return Err(Error::InvalidArgument(format!("test fraction {test_fraction} outside [0, 1)")));
            }
            let mut idx: Vec<usize> = (0..conductors.len()).collect();
            idx.shuffle(&mut rng);
            let n_test = (conductors.len() as f64 * test_fraction).round() as usize;
            let rest = idx.split_off(n_test);
            (idx, rest)
        }
        SplitMode::TopRange { lo, hi } => {
            if lo >= hi {
                return Err(Error::InvalidArgument("conductor cut must satisfy lo < hi".into()));
            }
            let test: Vec<usize> = (0..conductors.len()).filter(|&i| conductors[i] >= lo && conductors[i] < hi).collect();
            let mut rest: Vec<usize> = (0..conductors.len()).filter(|&i| conductors[i] < lo).collect();
            rest.shuffle(&mut rng);
            (test, rest)
        }
    };
    let total = (spec.train_parts + spec.val_parts) as f64;
    let n_val = (rest.len() as f64 * spec.val_parts as f64 / total).round() as usize;
    let train = rest.split_off(n_val);
    let out = DatasetSplit { train, val: rest, test };
    for (name, part) in [("train", &out.train), ("validation", &out.val), ("test", &out.test)] {
        if part.is_empty() {
            return Err(Error::EmptySplit(name));
        }
    }
    Ok(out)
}

/// 0 below the threshold, 1 at or above it.
pub fn merge_binary_labels(ranks: &[u32], threshold: u32) -> Vec<u32> {
    ranks.iter().map(|&r| u32::from(r >= threshold)).collect()
}

pub fn merge_binary_records(records: &[CurveRecord], threshold: u32) -> Vec<CurveRecord> {
    records
        .iter()
        .map(|r| CurveRecord { rank: r.rank.map(|x| u32::from(x >= threshold)), ..r.clone() })
        .collect()
}

/// `total / (K · count_k)` per class.
pub fn class_weights(labels: &[usize], num_classes: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; num_classes];
    for &l in labels {
        if l >= num_classes {
            return Err(Error::InvalidArgument(format!("label {l} outside 0..{num_classes}")));
        }
        counts[l] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingClass(missing));
    }
    let total = labels.len() as f64;
    Ok(counts.iter().map(|&c| total / (num_classes as f64 * c as f64)).collect())
}
