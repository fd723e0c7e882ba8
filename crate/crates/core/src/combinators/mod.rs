//! Composition tools: OR, speciality rebalancing, Johnson walks.

mod johnson;
mod or;
mod rebalance;

pub use johnson::{johnson_compose, JohnsonBound, JohnsonComposition, JohnsonSpec, SetMap};
pub use or::{or_compose, OrChild, OrComposition};
pub use rebalance::{rebalance_stage, SpecialityRebalance};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::LearningGraph;
use crate::scalar::Scalar;

/// `C¹(G) = max_y C¹(G, y)` over the positives of `f` (zero if none).
pub fn positive_complexity<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction) -> Result<S> {
    crate::complexity::max_positive(g, f, None)
}

fn value_of(f: &BooleanFunction, z: &Bits) -> Result<bool> {
    f.value(z).ok_or_else(|| Error::NotInDomain(z.to_string()))
}
