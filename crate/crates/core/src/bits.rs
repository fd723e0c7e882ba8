//! Index sets, input bit strings and partial assignments.

use std::fmt;

use crate::error::{Error, Result};

/// A sorted set of distinct 0-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(items: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn singleton(i: usize) -> Self {
        Self(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            if a < b {
                out.push(a);
                i += 1;
            } else if b < a {
                out.push(b);
                j += 1;
            } else {
                out.push(a);
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        IndexSet(out)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn insert(&self, i: usize) -> IndexSet {
        self.union(&IndexSet::singleton(i))
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::new(iter)
    }
}

/// An input `z ∈ {0,1}^N`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// Low `len` bits of `mask`, bit `i` of the mask being position `i`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut b = Self::zeros(len);
        if len > 0 {
            b.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones among the positions of `set`.
    pub fn count_ones_in(&self, set: &IndexSet) -> usize {
        set.iter().filter(|&i| self.get(i)).count()
    }

    pub fn agrees_on(&self, other: &Bits, set: &IndexSet) -> bool {
        set.iter().all(|i| self.get(i) == other.get(i))
    }

    pub fn restrict(&self, set: &IndexSet) -> PartialAssignment {
        PartialAssignment {
            set: set.clone(),
            bits: set.iter().map(|i| self.get(i)).collect(),
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl std::str::FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut b = Bits::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i, true),
                _ => return Err(Error::Malformed(format!("bad bit '{c}' in \"{s}\""))),
            }
        }
        Ok(b)
    }
}

/// Values of the bits on an index set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartialAssignment {
    set: IndexSet,
    bits: Vec<bool>,
}

impl PartialAssignment {
    pub fn new(set: IndexSet, bits: Vec<bool>) -> Result<Self> {
        if set.len() != bits.len() {
            return Err(Error::Malformed(format!(
                "assignment has {} bits for {} indices",
                bits.len(),
                set.len()
            )));
        }
        Ok(Self { set, bits })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn set(&self) -> &IndexSet {
        &self.set
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.set.0.binary_search(&i).ok().map(|k| self.bits[k])
    }

    pub fn matches(&self, z: &Bits) -> bool {
        self.set.iter().zip(&self.bits).all(|(i, &b)| z.get(i) == b)
    }

    /// Combined assignment; `None` when the two disagree on a shared index.
    pub fn merge(&self, other: &PartialAssignment) -> Option<PartialAssignment> {
        let set = self.set.union(&other.set);
        let mut bits = Vec::with_capacity(set.len());
        for i in set.iter() {
            match (self.get(i), other.get(i)) {
                (Some(a), Some(b)) if a != b => return None,
                (Some(a), _) | (None, Some(a)) => bits.push(a),
                (None, None) => unreachable!(),
            }
        }
        Some(PartialAssignment { set, bits })
    }

    /// Extends with one more index.
    pub fn with(&self, i: usize, b: bool) -> PartialAssignment {
        self.merge(&PartialAssignment {
            set: IndexSet::singleton(i),
            bits: vec![b],
        })
        .expect("index not yet assigned")
    }

    /// Serialized key `"i:b,i:b"` with 1-based indices, sorted by index.
    pub fn key(&self) -> String {
        self.set
            .iter()
            .zip(&self.bits)
            .map(|(i, &b)| format!("{}:{}", i + 1, u8::from(b)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for part in key.split(',').filter(|p| !p.is_empty()) {
            let (i, b) = part
                .split_once(':')
                .ok_or_else(|| Error::Malformed(format!("bad assignment key \"{key}\"")))?;
            let i: usize = i
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("bad index in \"{key}\"")))?;
            if i == 0 {
                return Err(Error::Malformed(format!("indices are 1-based in \"{key}\"")));
            }
            let b = match b.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(Error::Malformed(format!("bad bit in \"{key}\""))),
            };
            pairs.push((i - 1, b));
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed(format!("repeated index in \"{key}\"")));
        }
        Ok(Self {
            set: IndexSet(pairs.iter().map(|p| p.0).collect()),
            bits: pairs.iter().map(|p| p.1).collect(),
        })
    }
}

/// Source of bit values for weight-rule evaluation.
pub trait BitSource {
    fn bit(&self, i: usize) -> bool;
}

impl BitSource for Bits {
    fn bit(&self, i: usize) -> bool {
        self.get(i)
    }
}

impl BitSource for PartialAssignment {
    fn bit(&self, i: usize) -> bool {
        self.get(i)
            .unwrap_or_else(|| panic!("weight rule read unassigned index {i}"))
    }
}

/// Position of the unordered pair `{u, v}` (`u ≠ v`) among the pairs of
/// `n` vertices in lexicographic order `(0,1), (0,2), …, (n-2,n-1)`.
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(u != v && v < n);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Binomial coefficient as `u128`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
