//! Boolean functions over an explicit (promise) domain.

use std::collections::{BTreeMap, HashMap};

use crate::bits::{Bits, IndexSet};
use crate::error::{Error, Result};

/// `f : Z → {0,1}` given by its truth table, with an optional
/// 1-certificate for each positive input.
#[derive(Clone, Debug)]
pub struct BooleanFunction {
    n: usize,
    domain: Vec<Bits>,
    values: Vec<bool>,
    certs: BTreeMap<usize, IndexSet>,
    index: HashMap<Bits, usize>,
}

impl BooleanFunction {
    pub fn new(n: usize, domain: Vec<Bits>, values: Vec<bool>, certs: BTreeMap<usize, IndexSet>) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(Error::Malformed(format!(
                "{} domain points but {} values",
                domain.len(),
                values.len()
            )));
        }
        let mut index = HashMap::with_capacity(domain.len());
        for (k, z) in domain.iter().enumerate() {
            if z.len() != n {
                return Err(Error::Malformed(format!("input {z} has length != {n}")));
            }
            if index.insert(z.clone(), k).is_some() {
                return Err(Error::Malformed(format!("duplicate domain point {z}")));
            }
        }
        for (&k, set) in &certs {
            if k >= domain.len() || !values[k] {
                return Err(Error::Malformed(format!(
                    "certificate attached to a non-positive input #{k}"
                )));
            }
            if let Some(i) = set.max().filter(|&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
        }
        Ok(Self {
            n,
            domain,
            values,
            certs,
            index,
        })
    }

    /// Tabulates `value` over `domain`; `cert` is consulted on positives.
    pub fn from_predicate(
        n: usize,
        domain: Vec<Bits>,
        value: impl Fn(&Bits) -> bool,
        cert: impl Fn(&Bits) -> Option<IndexSet>,
    ) -> Result<Self> {
        let values: Vec<bool> = domain.iter().map(&value).collect();
        let certs = domain
            .iter()
            .enumerate()
            .filter(|(k, _)| values[*k])
            .filter_map(|(k, z)| cert(z).map(|c| (k, c)))
            .collect();
        Self::new(n, domain, values, certs)
    }

    /// The full cube `{0,1}^n` in increasing mask order.
    pub fn full_domain(n: usize) -> Vec<Bits> {
        assert!(n < 32, "full domain too large");
        (0..1u64 << n).map(|m| Bits::from_mask(n, m)).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &[Bits] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn value_at(&self, k: usize) -> bool {
        self.values[k]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn index_of(&self, z: &Bits) -> Option<usize> {
        self.index.get(z).copied()
    }

    pub fn value(&self, z: &Bits) -> Option<bool> {
        self.index_of(z).map(|k| self.values[k])
    }

    pub fn eval(&self, z: &Bits) -> Result<bool> {
        self.value(z).ok_or_else(|| Error::NotInDomain(z.to_string()))
    }

    pub fn positives(&self) -> impl Iterator<Item = &Bits> + '_ {
        self.domain.iter().zip(&self.values).filter(|(_, &v)| v).map(|(z, _)| z)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Bits> + '_ {
        self.domain
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| !v)
            .map(|(z, _)| z)
    }

    pub fn count_positive(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn cert(&self, y: &Bits) -> Option<&IndexSet> {
        self.index_of(y).and_then(|k| self.certs.get(&k))
    }

    pub fn certs(&self) -> &BTreeMap<usize, IndexSet> {
        &self.certs
    }

    /// Whether every `z ∈ Z` agreeing with `y` on `set` is positive.
    pub fn is_certificate(&self, y: &Bits, set: &IndexSet) -> bool {
        self.domain
            .iter()
            .zip(&self.values)
            .all(|(z, &v)| v || !z.agrees_on(y, set))
    }

    /// Positive inputs whose stored certificate is not a 1-certificate.
    pub fn bad_certificates(&self) -> Vec<usize> {
        self.certs
            .iter()
            .filter(|(&k, set)| !self.is_certificate(&self.domain[k], set))
            .map(|(&k, _)| k)
            .collect()
    }

    /// The same function restricted to the points accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&Bits) -> bool) -> BooleanFunction {
        let mut domain = Vec::new();
        let mut values = Vec::new();
        let mut certs = BTreeMap::new();
        for (k, z) in self.domain.iter().enumerate() {
            if keep(z) {
                if let Some(c) = self.certs.get(&k) {
                    certs.insert(domain.len(), c.clone());
                }
                domain.push(z.clone());
                values.push(self.values[k]);
            }
        }
        BooleanFunction::new(self.n, domain, values, certs).expect("restriction of a valid function")
    }

    /// The function restricted to the domain points at positions `keep`.
    pub fn select(&self, keep: &[usize]) -> BooleanFunction {
        let mut certs = BTreeMap::new();
        for (new, &k) in keep.iter().enumerate() {
            if let Some(c) = self.certs.get(&k) {
                certs.insert(new, c.clone());
            }
        }
        BooleanFunction::new(
            self.n,
            keep.iter().map(|&k| self.domain[k].clone()).collect(),
            keep.iter().map(|&k| self.values[k]).collect(),
            certs,
        )
        .expect("selection of a valid function")
    }

    /// A new function on the same domain.
    pub fn with_values(
        &self,
        value: impl Fn(&Bits) -> bool,
        cert: impl Fn(&Bits) -> Option<IndexSet>,
    ) -> BooleanFunction {
        BooleanFunction::from_predicate(self.n, self.domain.clone(), value, cert).expect("same domain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> BooleanFunction {
        BooleanFunction::from_predicate(
            2,
            BooleanFunction::full_domain(2),
            |z| z.get(0) && z.get(1),
            |_| Some(IndexSet::new([0, 1])),
        )
        .unwrap()
    }

    #[test]
    fn certificates_by_enumeration() {
        let f = and2();
        let y: Bits = "11".parse().unwrap();
        assert!(f.is_certificate(&y, &IndexSet::new([0, 1])));
        assert!(!f.is_certificate(&y, &IndexSet::new([0])));
        assert!(f.bad_certificates().is_empty());
        assert_eq!(f.count_positive(), 1);
    }

    #[test]
    fn promise_domain_makes_smaller_certificates() {
        let f = and2().restrict(|z| z.get(1));
        let y: Bits = "11".parse().unwrap();
        assert!(f.is_certificate(&y, &IndexSet::new([0])));
    }

    #[test]
    fn rejects_duplicates() {
        let z: Bits = "0".parse().unwrap();
        assert!(BooleanFunction::new(1, vec![z.clone(), z], vec![false, false], BTreeMap::new()).is_err());
    }
}
