//! Weight rules: the `w_z^b(e)` of an edge as a function of the bits it may read.

use std::collections::BTreeMap;

use crate::bits::{BitSource, IndexSet, PartialAssignment};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule<S> {
    Const(S),
    /// Constant `size`; the per-edge weight of a dense load over `size` indices.
    DenseLoad {
        size: usize,
    },
    /// Sparse-load weight on one path edge: `3 (|z_prefix| + 1) ln(total + 1)`
    /// when `z_index == side`, otherwise `3 total ln(total + 1)`.
    SparseLoad {
        prefix: IndexSet,
        index: usize,
        total: usize,
        side: bool,
    },
    /// Explicit values keyed by the assignment on `set`.
    Table {
        set: IndexSet,
        entries: BTreeMap<PartialAssignment, S>,
    },
    /// `base`, except `value` wherever the bits match `at`.
    Override {
        base: Box<WeightRule<S>>,
        at: PartialAssignment,
        value: S,
    },
}

impl<S: Scalar> WeightRule<S> {
    pub fn constant(v: S) -> Self {
        WeightRule::Const(v)
    }

    pub fn eval<B: BitSource + ?Sized>(&self, z: &B) -> Result<S> {
        match self {
            WeightRule::Const(v) => Ok(v.clone()),
            WeightRule::DenseLoad { size } => Ok(S::from_count(*size)),
            WeightRule::SparseLoad {
                prefix,
                index,
                total,
                side,
            } => {
                let log = S::from_count(total + 1).ln().ok_or(Error::InexactScalar)?;
                let three = S::from_count(3);
                if z.bit(*index) == *side {
                    let ones = prefix.iter().filter(|&i| z.bit(i)).count();
                    Ok(three * S::from_count(ones + 1) * log)
                } else {
                    Ok(three * S::from_count(*total) * log)
                }
            }
            WeightRule::Table { set, entries } => {
                let key = PartialAssignment::new(set.clone(), set.iter().map(|i| z.bit(i)).collect())?;
                entries
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| Error::Malformed(format!("weight table has no entry for \"{}\"", key.key())))
            }
            WeightRule::Override { base, at, value } => {
                if at.set().iter().zip(at.bits()).all(|(i, &b)| z.bit(i) == b) {
                    Ok(value.clone())
                } else {
                    base.eval(z)
                }
            }
        }
    }

    /// Indices the rule may read.
    pub fn reads(&self) -> IndexSet {
        match self {
            WeightRule::Const(_) | WeightRule::DenseLoad { .. } => IndexSet::empty(),
            WeightRule::SparseLoad { prefix, index, .. } => prefix.insert(*index),
            WeightRule::Table { set, .. } => set.clone(),
            WeightRule::Override { base, at, .. } => base.reads().union(at.set()),
        }
    }

    /// Smallest literal value stored in the rule, if any.
    pub fn min_literal(&self) -> Option<S> {
        match self {
            WeightRule::Const(v) => Some(v.clone()),
            WeightRule::DenseLoad { .. } | WeightRule::SparseLoad { .. } => None,
            WeightRule::Table { entries, .. } => entries.values().cloned().reduce(|a, b| if b < a { b } else { a }),
            WeightRule::Override { base, value, .. } => Some(match base.min_literal() {
                Some(m) if m < *value => m,
                _ => value.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;

    #[test]
    fn sparse_rule_is_dual() {
        let prefix = IndexSet::new([0, 1]);
        let w = |side| WeightRule::<f64>::SparseLoad {
            prefix: prefix.clone(),
            index: 2,
            total: 4,
            side,
        };
        let l = 5f64.ln();
        let z: Bits = "1000".parse().unwrap();
        assert!((w(false).eval(&z).unwrap() - 3.0 * 2.0 * l).abs() < 1e-12);
        assert!((w(true).eval(&z).unwrap() - 12.0 * l).abs() < 1e-12);
        let z: Bits = "1010".parse().unwrap();
        assert!((w(true).eval(&z).unwrap() - 6.0 * l).abs() < 1e-12);
        assert_eq!(w(true).reads(), IndexSet::new([0, 1, 2]));
    }

    #[test]
    fn exact_scalars_refuse_logs() {
        let w = WeightRule::<crate::Rational>::SparseLoad {
            prefix: IndexSet::empty(),
            index: 0,
            total: 1,
            side: true,
        };
        let z: Bits = "1".parse().unwrap();
        assert!(matches!(w.eval(&z), Err(Error::InexactScalar)));
    }

    #[test]
    fn table_and_override() {
        let set = IndexSet::new([0]);
        let a0 = PartialAssignment::new(set.clone(), vec![false]).unwrap();
        let a1 = PartialAssignment::new(set.clone(), vec![true]).unwrap();
        let t = WeightRule::Table {
            set,
            entries: [(a0.clone(), 1.0), (a1, 2.0)].into_iter().collect(),
        };
        let z: Bits = "1".parse().unwrap();
        assert_eq!(t.eval(&z).unwrap(), 2.0);
        let o = WeightRule::Override {
            base: Box::new(t),
            at: a0,
            value: 7.0,
        };
        assert_eq!(o.eval(&"0".parse::<Bits>().unwrap()).unwrap(), 7.0);
        assert_eq!(o.min_literal(), Some(1.0));
    }
}
