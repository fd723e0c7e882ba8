//! Extended learning graphs: construction, validation, complexity
//! evaluation, composition, adversary witnesses and the triangle-finding
//! instantiations.

pub mod adversary;
pub mod bits;
pub mod combinators;
pub mod complexity;
pub mod corpus;
pub mod costmodel;
pub mod error;
pub mod expand;
pub mod function;
pub mod graph;
pub mod json;
pub mod load;
pub mod rule;
pub mod scalar;
pub mod triangle;
pub mod validate;

pub use bits::{Bits, IndexSet, PartialAssignment};
pub use error::{Error, Result};
pub use function::BooleanFunction;
pub use load::LoadKind;
pub use rule::WeightRule;
pub use scalar::{Rational, Scalar};

/// Learning graph over double-precision weights.
pub type LearningGraph = graph::LearningGraph<f64>;
/// Learning graph over exact rational weights (no logarithmic rules).
pub type ExactLearningGraph = graph::LearningGraph<Rational>;
pub type SuperEdge = graph::SuperEdge<f64>;
pub type Edge = graph::Edge<f64>;
pub type ComplexityReport = complexity::ComplexityReport<f64>;
