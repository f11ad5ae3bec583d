//! Belief-function algebra over small finite frames.
//!
//! Mass functions are dense tables indexed by subset bitmask. Combination
//! rules iterate focal sets in ascending order, so their sums are
//! bit-identical to a plain double loop over all subset pairs.

mod discount;
mod frame;
mod mass;
mod refine;
mod specialize;

pub use discount::{contextual_discount, ContextualDiscount, DiscountRates, Partition};
pub use frame::{map, map_frame, same_frame, scan, scan_frame, Frame, Subset, MAX_FRAME_SIZE};
pub use mass::{
    argmax_class, argmax_class_with_margin, conjunctive_combine, dempster_combine, disjunctive_combine, pignistic, FocalSets, MassFunction,
};
pub use refine::{refine, Refining};
pub use specialize::{specialize, SpecializationMatrix};

use crate::error::Result;
use crate::scalar::Scalar;

/// Mobility specialization matrix for counter value `zeta`.
pub fn build_mobility_specialization<T: Scalar>(zeta: T) -> Result<SpecializationMatrix<T>> {
    SpecializationMatrix::mobility(zeta)
}
