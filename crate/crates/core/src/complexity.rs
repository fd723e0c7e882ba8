//! Negative, positive and total complexities of edge sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::{EdgeId, EdgeKind, LearningGraph};
use crate::scalar::Scalar;

/// Edge membership mask; `None` means every edge.
pub type EdgeMask<'a> = Option<&'a [bool]>;

fn in_mask(mask: EdgeMask<'_>, e: EdgeId) -> bool {
    mask.is_none_or(|m| m[e])
}

/// Builds a mask from a list of edges.
pub fn mask_of(g_edges: usize, edges: &[EdgeId]) -> Vec<bool> {
    let mut m = vec![false; g_edges];
    for &e in edges {
        m[e] = true;
    }
    m
}

/// Negative edge-complexity `c⁰(e, z)` of a single edge, with gate and scale applied.
pub fn edge_c0<S: Scalar>(g: &LearningGraph<S>, e: EdgeId, z: &Bits) -> Result<S> {
    let edge = g.edge(e);
    match &edge.kind {
        EdgeKind::Load { .. } => edge.weight(false, z),
        EdgeKind::Empty => Ok(S::zero()),
        EdgeKind::Super(s) => {
            if !edge.gate_open(z) {
                return Ok(S::zero());
            }
            Ok(edge.scale.clone() * s.c0(z)?)
        }
    }
}

/// Positive edge-complexity `c¹(e, z)`; `None` when the edge is closed on `z`
/// (zero weight), i.e. it may not carry flow for `z`.
pub fn edge_c1<S: Scalar>(g: &LearningGraph<S>, e: EdgeId, z: &Bits) -> Result<Option<S>> {
    let edge = g.edge(e);
    match &edge.kind {
        EdgeKind::Load { .. } => {
            let w = edge.weight(true, z)?;
            Ok(if w.is_zero() { None } else { Some(S::one() / w) })
        }
        EdgeKind::Empty => Ok(Some(S::zero())),
        EdgeKind::Super(s) => {
            if !edge.gate_open(z) || edge.scale.is_zero() {
                return Ok(None);
            }
            Ok(Some(s.c1(z)? / edge.scale.clone()))
        }
    }
}

/// `C⁰(F, x) = Σ_{e∈F} c⁰(e, x)`, unchecked.
pub fn negative_on<S: Scalar>(g: &LearningGraph<S>, mask: EdgeMask<'_>, x: &Bits) -> Result<S> {
    let mut acc = S::zero();
    for e in 0..g.edges().len() {
        if in_mask(mask, e) {
            acc = acc + edge_c0(g, e, x)?;
        }
    }
    Ok(acc)
}

/// `C¹(F, y) = Σ_{e∈F} p_y(e)² c¹(e, y)`, unchecked. Edges without flow
/// contribute nothing; flow on a zero-weight edge is an error.
pub fn positive_on<S: Scalar>(g: &LearningGraph<S>, mask: EdgeMask<'_>, y: &Bits) -> Result<S> {
    let Some(flow) = g.flow(y) else {
        return Ok(S::zero());
    };
    let mut acc = S::zero();
    for (e, p) in flow {
        if !in_mask(mask, *e) || p.is_zero() {
            continue;
        }
        match edge_c1(g, *e, y)? {
            Some(c) => acc = acc + p.clone() * p.clone() * c,
            None => {
                return Err(Error::FlowOnZeroWeight {
                    edge: *e,
                    input: y.to_string(),
                    flow: p.as_f64(),
                })
            }
        }
    }
    Ok(acc)
}

fn expect_side(f: &BooleanFunction, z: &Bits, expected: bool) -> Result<()> {
    let v = f.eval(z)?;
    if v != expected {
        return Err(Error::WrongSide {
            input: z.to_string(),
            expected: expected.into(),
            actual: v.into(),
        });
    }
    Ok(())
}

/// Negative complexity of `F` on a negative input `x` of `f`.
pub fn c0<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction, mask: EdgeMask<'_>, x: &Bits) -> Result<S> {
    expect_side(f, x, false)?;
    negative_on(g, mask, x)
}

/// Positive complexity of `F` on a positive input `y` of `f`.
pub fn c1<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction, mask: EdgeMask<'_>, y: &Bits) -> Result<S> {
    expect_side(f, y, true)?;
    positive_on(g, mask, y)
}

/// `max_x C⁰(F, x)` over the negatives of `f` (zero when there are none).
pub fn max_negative<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction, mask: EdgeMask<'_>) -> Result<S> {
    let vals: Result<Vec<S>> = f
        .negatives()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| negative_on(g, mask, x))
        .collect();
    Ok(vals?.into_iter().fold(S::zero(), S::max_of))
}

/// `max_y C¹(F, y)` over the positives of `f` (zero when there are none).
pub fn max_positive<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction, mask: EdgeMask<'_>) -> Result<S> {
    let vals: Result<Vec<S>> = f
        .positives()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|y| positive_on(g, mask, y))
        .collect();
    Ok(vals?.into_iter().fold(S::zero(), S::max_of))
}

/// Complexities of one edge set.
#[derive(Clone, Debug, Serialize)]
pub struct StageReport<S> {
    pub name: String,
    pub provenance: Option<String>,
    #[serde(skip)]
    pub negative: Vec<(Bits, S)>,
    #[serde(skip)]
    pub positive: Vec<(Bits, S)>,
    #[serde(skip)]
    pub c0_max: S,
    #[serde(skip)]
    pub c1_max: S,
    /// `√(C⁰ C¹)`.
    pub c: f64,
    /// Positive inputs whose flow entering the stage is not 1.
    pub flow_violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ComplexityReport<S> {
    pub stages: Vec<StageReport<S>>,
    pub total: StageReport<S>,
}

impl<S: Scalar> ComplexityReport<S> {
    pub fn c0(&self) -> &S {
        &self.total.c0_max
    }

    pub fn c1(&self) -> &S {
        &self.total.c1_max
    }

    pub fn c(&self) -> f64 {
        self.total.c
    }
}

/// Total flow entering an edge set: flow on its edges whose tail is not
/// the head of another edge of the set.
pub fn stage_inflow<S: Scalar>(g: &LearningGraph<S>, edges: &[EdgeId], y: &Bits) -> S {
    let mask = mask_of(g.edges().len(), edges);
    let mut heads = vec![false; g.vertex_count()];
    for &e in edges {
        heads[g.edge(e).to] = true;
    }
    let Some(flow) = g.flow(y) else { return S::zero() };
    let mut acc = S::zero();
    for (e, p) in flow {
        if mask[*e] && !heads[g.edge(*e).from] {
            acc = acc + p.clone();
        }
    }
    acc
}

fn stage_report<S: Scalar>(
    g: &LearningGraph<S>,
    f: &BooleanFunction,
    name: &str,
    provenance: Option<String>,
    edges: Option<&[EdgeId]>,
) -> Result<StageReport<S>> {
    let mask = edges.map(|e| mask_of(g.edges().len(), e));
    let m = mask.as_deref();
    let negs: Vec<&Bits> = f.negatives().collect();
    let poss: Vec<&Bits> = f.positives().collect();
    let negative: Vec<(Bits, S)> = negs
        .par_iter()
        .map(|x| negative_on(g, m, x).map(|v| ((*x).clone(), v)))
        .collect::<Result<_>>()?;
    let positive: Vec<(Bits, S)> = poss
        .par_iter()
        .map(|y| positive_on(g, m, y).map(|v| ((*y).clone(), v)))
        .collect::<Result<_>>()?;
    let c0_max = negative.iter().map(|p| p.1.clone()).fold(S::zero(), S::max_of);
    let c1_max = positive.iter().map(|p| p.1.clone()).fold(S::zero(), S::max_of);
    let c = (c0_max.as_f64() * c1_max.as_f64()).sqrt();
    let mut flow_violations = Vec::new();
    if let Some(edges) = edges.filter(|e| !e.is_empty()) {
        for y in &poss {
            let inflow = stage_inflow(g, edges, y);
            if !inflow.close_to(&S::one(), 1e-9) {
                flow_violations.push(format!("{y}: inflow {}", inflow.as_f64()));
            }
        }
    }
    Ok(StageReport {
        name: name.to_string(),
        provenance,
        negative,
        positive,
        c0_max,
        c1_max,
        c,
        flow_violations,
    })
}

/// Full report: every recorded stage (or `stages` when given) plus the total.
pub fn complexity<S: Scalar>(
    g: &LearningGraph<S>,
    f: &BooleanFunction,
    stages: Option<&[crate::graph::Stage]>,
) -> Result<ComplexityReport<S>> {
    let stages = stages.unwrap_or(g.stages());
    let reports = stages
        .iter()
        .map(|s| stage_report(g, f, &s.name, s.provenance.clone(), Some(&s.edges)))
        .collect::<Result<Vec<_>>>()?;
    let total = stage_report(g, f, "total", None, None)?;
    Ok(ComplexityReport { stages: reports, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::IndexSet;
    use crate::graph::Edge;
    use crate::rule::WeightRule;

    fn identity() -> (LearningGraph<f64>, BooleanFunction) {
        let mut g = LearningGraph::new(1, IndexSet::empty());
        let v = g.add_vertex(IndexSet::singleton(0));
        let e = g.add_edge(Edge::load(0, v, 0, WeightRule::Const(1.0), WeightRule::Const(1.0)));
        let y: Bits = "1".parse().unwrap();
        g.add_flow(&y, e, 1.0);
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
    fn single_edge() {
        let (g, f) = identity();
        let r = complexity(&g, &f, None).unwrap();
        assert_eq!(*r.c0(), 1.0);
        assert_eq!(*r.c1(), 1.0);
        assert_eq!(r.c(), 1.0);
    }

    #[test]
    fn wrong_side_and_domain() {
        let (g, f) = identity();
        let y: Bits = "1".parse().unwrap();
        assert!(matches!(c0(&g, &f, None, &y), Err(Error::WrongSide { .. })));
        let bad: Bits = "11".parse().unwrap();
        assert!(matches!(c0(&g, &f, None, &bad), Err(Error::NotInDomain(_))));
    }

    #[test]
    fn scaling_leaves_c_fixed() {
        let (mut g, f) = identity();
        g.scale_all(&4.0);
        let r = complexity(&g, &f, None).unwrap();
        assert_eq!(*r.c0(), 4.0);
        assert_eq!(*r.c1(), 0.25);
        assert!((r.c() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_on_zero_weight_is_an_error() {
        let (mut g, f) = identity();
        g.scale_all(&0.0);
        let y: Bits = "1".parse().unwrap();
        assert!(matches!(c1(&g, &f, None, &y), Err(Error::FlowOnZeroWeight { .. })));
    }
}
