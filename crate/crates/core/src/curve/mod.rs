//! Elliptic curves over Q: models, local data, a_p, the group law and torsion.

mod aprecord;
mod count;
pub mod local;
mod point;
mod torsion;
mod weierstrass;

pub use aprecord::{ap_batch, ap_record, ApRecord};
pub use count::{ap_good_prime, group_order, QrTable};
pub use local::{conductor, reduction_type, tate, Kodaira, LocalData, ReductionType};
pub use point::{point_add, point_neg, point_on_curve, scalar_mul, ProjectivePoint};
pub use torsion::{find_torsion_point, torsion_bound, torsion_is_trivial};
pub use weierstrass::{model_from_c4c6, residue, valuation, Invariants, WeierstrassCurve};
