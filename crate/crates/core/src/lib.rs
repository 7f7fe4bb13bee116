pub mod arith;
pub mod curve;
pub mod dataset;
pub mod nn;
pub mod sums;
pub mod error;

pub use error::{Error, Result};
