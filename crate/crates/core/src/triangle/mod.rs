//! Triangle finding: graph inputs, the `Triangle` function, Δ-sets,
//! the three learning-graph constructions and the counting oracles.

mod build;
pub mod oracle;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::{pair_index, Bits, IndexSet};
use crate::error::{Error, Result};
use crate::function::BooleanFunction;

pub use build::{build, build_dense, build_sparse, build_sparsenew, sparsenew_regime, TriangleParams, Variant};

/// Largest `n` for which the full input cube is materialized.
pub const MAX_EXPLICIT_N: usize = 5;

/// An undirected simple graph on `n` vertices, seen as an input
/// `z ∈ {0,1}^{C(n,2)}` with pairs in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance {
    n: usize,
    /// Neighbourhood bitmask per vertex.
    adj: Vec<u64>,
}

impl GraphInstance {
    pub fn empty(n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::SizeCap {
                what: "vertices",
                value: n,
                cap: 64,
            });
        }
        Ok(Self { n, adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange { index: u.max(v), n });
            }
            if u == v {
                return Err(Error::Malformed(format!("self-loop at vertex {u}")));
            }
            g.adj[u] |= 1 << v;
            g.adj[v] |= 1 << u;
        }
        Ok(g)
    }

    pub fn from_bits(n: usize, z: &Bits) -> Result<Self> {
        if z.len() != pair_count(n) {
            return Err(Error::Malformed(format!(
                "input of length {} does not encode a graph on {n} vertices",
                z.len()
            )));
        }
        let mut g = Self::empty(n)?;
        for u in 0..n {
            for v in u + 1..n {
                if z.get(pair_index(n, u, v)) {
                    g.adj[u] |= 1 << v;
                    g.adj[v] |= 1 << u;
                }
            }
        }
        Ok(g)
    }

    pub fn to_bits(&self) -> Bits {
        let mut z = Bits::zeros(pair_count(self.n));
        for (u, v) in self.edges() {
            z.set(pair_index(self.n, u, v), true);
        }
        z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    /// `N_v` as a bitmask.
    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    /// `N_{u,v} = N_u ∩ N_v`; `N_{u,u} = N_u`.
    pub fn common(&self, u: usize, v: usize) -> u64 {
        self.adj[u] & self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| {
                (u + 1..self.n)
                    .filter(move |&v| self.has_edge(u, v))
                    .map(move |v| (u, v))
            })
            .collect()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(|a| a.count_ones() as usize).collect()
    }

    /// `d₂² = Σ_v |N_v|² / n`.
    pub fn d2_squared(&self) -> f64 {
        let s: usize = self.degrees().iter().map(|d| d * d).sum();
        s as f64 / self.n as f64
    }

    pub fn d2(&self) -> f64 {
        self.d2_squared().sqrt()
    }

    /// Triangles `u < v < w` in lexicographic order.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    continue;
                }
                for w in v + 1..self.n {
                    if self.has_edge(u, w) && self.has_edge(v, w) {
                        out.push([u, v, w]);
                    }
                }
            }
        }
        out
    }

    pub fn first_triangle(&self) -> Option<[usize; 3]> {
        self.triangles().into_iter().next()
    }
}

/// Number of vertex pairs, `C(n,2)`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Bit positions of the three edges of a triangle.
pub fn triangle_edges(n: usize, t: [usize; 3]) -> IndexSet {
    IndexSet::new([
        pair_index(n, t[0], t[1]),
        pair_index(n, t[0], t[2]),
        pair_index(n, t[1], t[2]),
    ])
}

/// Every graph on `n` vertices as an input.
pub fn graph_domain(n: usize) -> Result<Vec<Bits>> {
    if n > MAX_EXPLICIT_N {
        return Err(Error::SizeCap {
            what: "vertices for an explicit domain",
            value: n,
            cap: MAX_EXPLICIT_N,
        });
    }
    Ok(BooleanFunction::full_domain(pair_count(n)))
}

/// `Triangle(G) = 1` iff `G` has a triangle; the certificate is the edge
/// set of the lexicographically first triangle.
pub fn triangle_function(n: usize) -> Result<BooleanFunction> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("Triangle needs n >= 3, got {n}")));
    }
    let domain = graph_domain(n)?;
    let decode = |z: &Bits| GraphInstance::from_bits(n, z).expect("domain point encodes a graph");
    BooleanFunction::from_predicate(
        pair_count(n),
        domain,
        |z| decode(z).first_triangle().is_some(),
        |z| decode(z).first_triangle().map(|t| triangle_edges(n, t)),
    )
}

/// The Δ-sets of a graph for a blocking set `X`, as ordered pairs
/// (diagonal included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaSets {
    /// `Δ(X) = {(u,v) ∈ V² : N_{u,v} ∩ X = ∅}`.
    pub delta_x: BTreeSet<(usize, usize)>,
    /// `Δ(X,B) = B² ∩ Δ(X)`, when `B` is given.
    pub delta_xb: Option<BTreeSet<(usize, usize)>>,
    /// `Δ(X,B,w) = N_w² ∩ Δ(X,B)`, when `B` and `w` are given.
    pub delta_xbw: Option<BTreeSet<(usize, usize)>>,
}

pub fn mask_of(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &v| m | 1 << v)
}

pub fn delta_sets(g: &GraphInstance, x: &[usize], b: Option<&[usize]>, w: Option<usize>) -> DeltaSets {
    let xm = mask_of(x);
    let delta_x: BTreeSet<(usize, usize)> = (0..g.n)
        .flat_map(|u| (0..g.n).map(move |v| (u, v)))
        .filter(|&(u, v)| g.common(u, v) & xm == 0)
        .collect();
    let delta_xb = b.map(|b| {
        let bm = mask_of(b);
        delta_x
            .iter()
            .copied()
            .filter(|&(u, v)| bm >> u & 1 == 1 && bm >> v & 1 == 1)
            .collect::<BTreeSet<_>>()
    });
    let delta_xbw = match (&delta_xb, w) {
        (Some(d), Some(w)) => {
            let nw = g.neighbors(w);
            Some(
                d.iter()
                    .copied()
                    .filter(|&(u, v)| nw >> u & 1 == 1 && nw >> v & 1 == 1)
                    .collect(),
            )
        }
        _ => None,
    };
    DeltaSets {
        delta_x,
        delta_xb,
        delta_xbw,
    }
}

/// JSON form `{"n": …, "edges": [[u, v], …]}` with 1-based vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphInstanceJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphInstanceJson {
    pub fn from_instance(g: &GraphInstance) -> Self {
        Self {
            n: g.n,
            edges: g.edges().into_iter().map(|(u, v)| [u + 1, v + 1]).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<GraphInstance> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for &[u, v] in &self.edges {
            if u == 0 || v == 0 {
                return Err(Error::Malformed("vertices are numbered from 1".into()));
            }
            edges.push((u - 1, v - 1));
        }
        GraphInstance::from_edges(self.n, &edges)
    }
}
