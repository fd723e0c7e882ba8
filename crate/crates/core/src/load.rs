//! Load gadgets: super edges that learn a whole index set.

use serde::{Deserialize, Serialize};

use crate::bits::IndexSet;
use crate::graph::{Edge, LearningGraph, SuperEdge};
use crate::rule::WeightRule;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadKind {
    Dense,
    Sparse,
}

pub fn load<S: Scalar>(kind: LoadKind, set: &IndexSet) -> SuperEdge<S> {
    match kind {
        LoadKind::Dense => dense_load(set),
        LoadKind::Sparse => sparse_load(set),
    }
}

/// Path over `set` (ascending) with weight `|S|` on both sides of every
/// edge: `c⁰ = |S|²` and `c¹ = 1` on every input.
pub fn dense_load<S: Scalar>(set: &IndexSet) -> SuperEdge<S> {
    let size = set.len();
    path(set, LoadKind::Dense, |_, _| {
        (WeightRule::DenseLoad { size }, WeightRule::DenseLoad { size })
    })
}

/// Path over `set` (ascending) whose weights track the number of ones
/// already seen, so that sparse substrings are cheap to learn.
pub fn sparse_load<S: Scalar>(set: &IndexSet) -> SuperEdge<S> {
    let total = set.len();
    path(set, LoadKind::Sparse, |prefix, index| {
        let rule = |side| WeightRule::SparseLoad {
            prefix: prefix.clone(),
            index,
            total,
            side,
        };
        (rule(false), rule(true))
    })
}

fn path<S: Scalar>(
    set: &IndexSet,
    kind: LoadKind,
    weights: impl Fn(&IndexSet, usize) -> (WeightRule<S>, WeightRule<S>),
) -> SuperEdge<S> {
    let n = set.max().map_or(0, |m| m + 1);
    let mut g = LearningGraph::new(n, IndexSet::empty());
    let mut at = g.root();
    let mut flow = Vec::with_capacity(set.len());
    for index in set.iter() {
        let prefix = g.label(at).clone();
        let next = g.add_vertex(prefix.insert(index));
        let (w0, w1) = weights(&prefix, index);
        flow.push((g.add_edge(Edge::load(at, next, index, w0, w1)), S::one()));
        at = next;
    }
    g.set_universal_flow(flow);
    SuperEdge::from_graph(g)
        .expect("a path has a unique sink")
        .with_kind(kind, set.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn dense_three_is_nine_and_one_exactly() {
        let s = IndexSet::new([0, 1, 2]);
        let e: SuperEdge<Rational> = dense_load(&s);
        assert_eq!(e.graph().edges().len(), 3);
        for m in 0..8 {
            let z = Bits::from_mask(3, m);
            assert_eq!(e.c0(&z).unwrap(), ratio(9, 1));
            assert_eq!(e.c1(&z).unwrap(), ratio(1, 1));
        }
        assert_eq!(e.loads(), &s);
    }

    #[test]
    fn dense_single_and_five() {
        let e: SuperEdge<f64> = dense_load(&IndexSet::new([3]));
        let z = Bits::zeros(4);
        assert_eq!(e.c0(&z).unwrap(), 1.0);
        assert_eq!(e.c1(&z).unwrap(), 1.0);
        let e: SuperEdge<f64> = dense_load(&IndexSet::new(0..5));
        let z: Bits = "10110".parse().unwrap();
        assert_eq!(e.c0(&z).unwrap(), 25.0);
    }

    #[test]
    fn sparse_four_all_zero_and_all_one() {
        let e: SuperEdge<f64> = sparse_load(&IndexSet::new(0..4));
        let l5 = 5f64.ln();
        let zero: Bits = "0000".parse().unwrap();
        assert!((e.c0(&zero).unwrap() - 12.0 * l5).abs() < 1e-12);
        assert!((e.c0(&zero).unwrap() - 19.3133).abs() < 1e-4);
        assert!((e.c1(&zero).unwrap() - 1.0 / (3.0 * l5)).abs() < 1e-12);
        assert!((e.c1(&zero).unwrap() - 0.2071).abs() < 1e-4);
        let ones: Bits = "1111".parse().unwrap();
        assert!((e.c0(&ones).unwrap() - 48.0 * l5).abs() < 1e-12);
        assert!((e.c0(&ones).unwrap() - 77.2533).abs() < 1e-3);
    }

    #[test]
    fn empty_set_is_trivial() {
        let e: SuperEdge<f64> = dense_load(&IndexSet::empty());
        assert!(e.loads().is_empty());
        assert_eq!(e.c0(&Bits::zeros(0)).unwrap(), 0.0);
    }
}
