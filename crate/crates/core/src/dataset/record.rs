use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};

/// One labeled (or not yet labeled) curve of a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub id: String,
    pub ainvs: [BigInt; 5],
    pub conductor: BigUint,
    pub rank: Option<u32>,
    pub source: String,
    /// Isogeny class label when the input file carries one.
    pub isogeny_class: Option<String>,
}

impl CurveRecord {
    pub fn new(id: impl Into<String>, ainvs: [BigInt; 5], conductor: BigUint, rank: Option<u32>) -> Self {
        Self { id: id.into(), ainvs, conductor, rank, source: String::new(), isogeny_class: None }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn curve(&self) -> Result<WeierstrassCurve> {
        Ok(WeierstrassCurve::from_big_ainvs(self.ainvs.clone())?.with_conductor(self.conductor.clone()))
    }

    /// Nonsingular, positive conductor, rank within `max_rank` when given.
    pub fn validate(&self, max_rank: Option<u32>) -> Result<()> {
        let invalid = |msg: String| Error::Validation { id: self.id.clone(), msg };
        WeierstrassCurve::from_big_ainvs(self.ainvs.clone()).map_err(|_| invalid("singular model".into()))?;
        if self.conductor == BigUint::from(0u8) {
            return Err(invalid("conductor must be positive".into()));
        }
        if let (Some(r), Some(m)) = (self.rank, max_rank) {
            if r > m {
                return Err(invalid(format!("rank {r} above the label range 0..={m}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> Result<usize> {
        self.rank
            .map(|r| r as usize)
            .ok_or_else(|| Error::Validation { id: self.id.clone(), msg: "missing rank label".into() })
    }
}
