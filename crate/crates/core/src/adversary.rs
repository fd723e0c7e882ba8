//! Feasible solutions of the general adversary bound built from learning graphs.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::PartialAssignment;
use crate::complexity::complexity;
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::{EdgeKind, LearningGraph};
use crate::rule::WeightRule;

/// Default cap on the domain size for witness construction.
pub const DEFAULT_CAP: usize = 4096;

/// Multiplies every weight by `√(C¹/C⁰)` so that both sides equal `C(G)`.
pub fn rebalance_to_equal(g: &LearningGraph<f64>, f: &BooleanFunction) -> Result<LearningGraph<f64>> {
    let r = complexity(g, f, Some(&[]))?;
    let (c0, c1) = (*r.c0(), *r.c1());
    if c0 <= 0.0 || c1 <= 0.0 {
        return Err(Error::DegenerateComplexity);
    }
    let mut out = g.clone();
    out.scale_all(&(c1 / c0).sqrt());
    Ok(out)
}

/// Sparse vector over the domain: `(input position, value)`.
pub type Factor = Vec<(usize, f64)>;

/// The matrices `X_j = Σ ψψᵀ`, stored as their factors.
#[derive(Clone, Debug)]
pub struct AdversaryWitness {
    pub n: usize,
    pub size: usize,
    pub factors: Vec<Vec<Factor>>,
    /// `C(G)` of the graph the witness was built from.
    pub graph_complexity: f64,
}

impl AdversaryWitness {
    /// Dense `X_j`.
    pub fn dense(&self, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for psi in &self.factors[j] {
            for &(a, va) in psi {
                for &(b, vb) in psi {
                    m[(a, b)] += va * vb;
                }
            }
        }
        m
    }
}

/// Builds `{X_j}` from a super-edge-free learning graph.
///
/// For each edge loading `j` and each assignment `α` of its source label,
/// `ψ_b[z] = p_e(z)/√w¹_z(e)` for positive `z` with `z_j = 1-b` and
/// `ψ_b[z] = √w⁰_z(e)` for negative `z` with `z_j = b`, restricted to the
/// inputs agreeing with `α`.
pub fn build_witness(g: &LearningGraph<f64>, f: &BooleanFunction, cap: usize) -> Result<AdversaryWitness> {
    if g.has_super_edges() {
        return Err(Error::Malformed("expand super edges before building a witness".into()));
    }
    if f.len() > cap {
        return Err(Error::SizeCap {
            what: "domain size",
            value: f.len(),
            cap,
        });
    }
    let graph_complexity = complexity(g, f, Some(&[]))?.c();
    let mut flow_on: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.edges().len()];
    for (idx, z) in f.domain().iter().enumerate() {
        if !f.value_at(idx) {
            continue;
        }
        for (e, p) in g.flow(z).unwrap_or(&[]) {
            if *p != 0.0 {
                flow_on[*e].push((idx, *p));
            }
        }
    }
    let per_edge: Vec<(usize, Vec<Factor>)> = g
        .edges()
        .par_iter()
        .enumerate()
        .filter_map(|(e, edge)| match edge.kind {
            EdgeKind::Load { index, .. } => Some((e, edge, index)),
            _ => None,
        })
        .map(|(e, edge, j)| -> Result<(usize, Vec<Factor>)> {
            let from = g.label(edge.from);
            let flow: BTreeMap<usize, f64> = flow_on[e].iter().copied().collect();
            let mut groups: BTreeMap<PartialAssignment, [Factor; 2]> = BTreeMap::new();
            for (idx, z) in f.domain().iter().enumerate() {
                let zj = z.get(j);
                let (b, v) = if f.value_at(idx) {
                    let p = flow.get(&idx).copied().unwrap_or(0.0);
                    if p == 0.0 {
                        continue;
                    }
                    let w = edge.weight(true, z)?;
                    if w <= 0.0 {
                        return Err(Error::FlowOnZeroWeight {
                            edge: e,
                            input: z.to_string(),
                            flow: p,
                        });
                    }
                    (!zj, p / w.sqrt())
                } else {
                    let w = edge.weight(false, z)?;
                    if w == 0.0 {
                        continue;
                    }
                    (zj, w.sqrt())
                };
                groups.entry(z.restrict(from)).or_default()[usize::from(b)].push((idx, v));
            }
            Ok((j, groups.into_values().flatten().filter(|p| !p.is_empty()).collect()))
        })
        .collect::<Result<_>>()?;
    let mut factors = vec![Vec::new(); f.n()];
    for (j, fs) in per_edge {
        factors[j].extend(fs);
    }
    Ok(AdversaryWitness {
        n: f.n(),
        size: f.len(),
        factors,
        graph_complexity,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdCheck {
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub worst_index: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingCheck {
    pub pass: bool,
    pub pairs: usize,
    pub max_deviation: f64,
    pub worst_pair: Option<(String, String)>,
    pub worst_value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectiveCheck {
    pub pass: bool,
    pub objective: f64,
    pub graph_complexity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub psd: PsdCheck,
    pub crossing: CrossingCheck,
    pub objective: ObjectiveCheck,
}

/// Checks the adversary constraints: each `X_j ⪰ 0`, each crossing pair
/// sums to 1, and the objective `max_z Σ_j X_j[z,z]` equals `C(G)`.
pub fn verify_witness(w: &AdversaryWitness, f: &BooleanFunction, tol: f64) -> VerificationReport {
    let dense: Vec<DMatrix<f64>> = (0..w.n).into_par_iter().map(|j| w.dense(j)).collect();

    let eig: Vec<f64> = dense
        .par_iter()
        .map(|m| {
            if m.nrows() == 0 {
                return 0.0;
            }
            SymmetricEigen::new(m.clone())
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (worst_index, min_eigenvalue) =
        eig.iter().copied().enumerate().fold(
            (None, f64::INFINITY),
            |acc, (j, v)| if v < acc.1 { (Some(j), v) } else { acc },
        );
    let min_eigenvalue = if min_eigenvalue.is_finite() {
        min_eigenvalue
    } else {
        0.0
    };
    let psd = PsdCheck {
        pass: min_eigenvalue >= -tol,
        min_eigenvalue,
        worst_index,
    };

    let domain = f.domain();
    let negatives: Vec<usize> = (0..f.len()).filter(|&k| !f.value_at(k)).collect();
    let positives: Vec<usize> = (0..f.len()).filter(|&k| f.value_at(k)).collect();
    let worst = negatives
        .par_iter()
        .map(|&x| {
            let mut best: (f64, Option<(usize, usize)>, f64) = (0.0, None, 0.0);
            for &y in &positives {
                let mut s = 0.0;
                for (j, m) in dense.iter().enumerate() {
                    if domain[x].get(j) != domain[y].get(j) {
                        s += m[(x, y)];
                    }
                }
                let dev = (s - 1.0).abs();
                if best.1.is_none() || dev > best.0 {
                    best = (dev, Some((x, y)), s);
                }
            }
            best
        })
        .reduce(
            || (0.0, None, 0.0),
            |a, b| {
                if b.1.is_some() && (a.1.is_none() || b.0 > a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let crossing = CrossingCheck {
        pass: worst.0 <= tol,
        pairs: negatives.len() * positives.len(),
        max_deviation: worst.0,
        worst_pair: worst.1.map(|(x, y)| (domain[x].to_string(), domain[y].to_string())),
        worst_value: worst.1.map(|_| worst.2),
    };

    let objective = (0..f.len())
        .map(|z| dense.iter().map(|m| m[(z, z)]).sum::<f64>())
        .fold(0f64, f64::max);
    let c = w.graph_complexity;
    let objective = ObjectiveCheck {
        pass: (objective - c).abs() <= tol * c.max(1.0),
        objective,
        graph_complexity: c,
    };
    VerificationReport {
        pass: psd.pass && crossing.pass && objective.pass,
        psd,
        crossing,
        objective,
    }
}

/// A copy of a graph with one negative weight multiplied by 4 at one
/// assignment, breaking the linking condition on a pair carrying flow.
#[derive(Clone, Debug)]
pub struct Mutant {
    pub graph: LearningGraph<f64>,
    pub edge: usize,
    pub at: PartialAssignment,
    /// Flow of the positive partner on the mutated edge.
    pub flow: f64,
}

/// Up to `limit` single-weight mutants, spread evenly over all candidate
/// `(edge, assignment)` pairs where a positive input sends more than
/// `min_flow` across the edge.
pub fn linking_mutants(g: &LearningGraph<f64>, f: &BooleanFunction, limit: usize, min_flow: f64) -> Vec<Mutant> {
    let mut candidates: BTreeSet<(usize, PartialAssignment)> = BTreeSet::new();
    let mut flows: BTreeMap<(usize, PartialAssignment), f64> = BTreeMap::new();
    for y in f.positives() {
        for (e, p) in g.flow(y).unwrap_or(&[]) {
            if *p <= min_flow {
                continue;
            }
            let edge = g.edge(*e);
            let EdgeKind::Load { index, .. } = edge.kind else {
                continue;
            };
            let from = g.label(edge.from);
            // A negative agreeing on S(from) and differing at j.
            let partner = f
                .negatives()
                .find(|x| x.agrees_on(y, from) && x.get(index) != y.get(index) && edge.gate_open(x));
            if let Some(x) = partner {
                let at = x.restrict(g.label(edge.to));
                let key = (*e, at);
                let entry = flows.entry(key.clone()).or_insert(0.0);
                *entry = entry.max(*p);
                candidates.insert(key);
            }
        }
    }
    let all: Vec<_> = candidates.into_iter().collect();
    if all.is_empty() || limit == 0 {
        return Vec::new();
    }
    let stride = (all.len() as f64 / limit as f64).max(1.0);
    let mut out = Vec::new();
    let mut pos = 0f64;
    while (pos as usize) < all.len() && out.len() < limit {
        let (e, at) = all[pos as usize].clone();
        let mut m = g.clone();
        let edge = m.edge_mut(e);
        if let EdgeKind::Load { w0, .. } = &mut edge.kind {
            let mut bits = crate::bits::Bits::zeros(f.n());
            for (i, b) in at.set().iter().zip(at.bits()) {
                bits.set(i, *b);
            }
            let base = w0.eval(&bits).unwrap_or(1.0);
            let value = if base > 0.0 { 4.0 * base } else { 1.0 };
            *w0 = WeightRule::Override {
                base: Box::new(w0.clone()),
                at: at.clone(),
                value,
            };
        }
        let flow = flows[&(e, at.clone())];
        out.push(Mutant {
            graph: m,
            edge: e,
            at,
            flow,
        });
        pos += stride;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::IndexSet;
    use crate::graph::Edge;

    fn identity() -> (LearningGraph<f64>, BooleanFunction) {
        let mut g = LearningGraph::new(1, IndexSet::empty());
        let v = g.add_vertex(IndexSet::singleton(0));
        let e = g.add_edge(Edge::load(0, v, 0, WeightRule::Const(1.0), WeightRule::Const(1.0)));
        g.add_flow(&"1".parse().unwrap(), e, 1.0);
        let f = BooleanFunction::from_predicate(
            1,
            BooleanFunction::full_domain(1),
            |z| z.get(0),
            |_| Some(IndexSet::singleton(0)),
        )
        .unwrap();
        (g, f)
    }

    #[test]
    fn one_bit_identity_witness() {
        let (g, f) = identity();
        let w = build_witness(&g, &f, DEFAULT_CAP).unwrap();
        let x0 = w.dense(0);
        assert_eq!(x0, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        let r = verify_witness(&w, &f, 1e-9);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.objective.objective, 1.0);
    }

    #[test]
    fn rebalancing_equalizes() {
        let (mut g, f) = identity();
        g.scale_all(&4.0);
        let b = rebalance_to_equal(&g, &f).unwrap();
        let r = complexity(&b, &f, None).unwrap();
        assert!((r.c0() - 1.0).abs() < 1e-12 && (r.c1() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_objective_is_the_larger_side() {
        let (mut g, f) = identity();
        g.scale_all(&4.0);
        let w = build_witness(&g, &f, DEFAULT_CAP).unwrap();
        let r = verify_witness(&w, &f, 1e-9);
        assert_eq!(r.objective.objective, 4.0);
        assert!(r.crossing.pass && r.psd.pass);
    }

    #[test]
    fn mutant_breaks_crossing_constraint() {
        let (g, f) = identity();
        let ms = linking_mutants(&g, &f, 5, 0.01);
        assert_eq!(ms.len(), 1);
        let w = build_witness(&ms[0].graph, &f, DEFAULT_CAP).unwrap();
        let r = verify_witness(&w, &f, 1e-9);
        assert!(!r.crossing.pass);
        assert!(r.crossing.max_deviation > 1e-3);
    }
}
