//! Replacing super edges by the graphs they stand for.

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeKind, Flows, LearningGraph, Stage};
use crate::scalar::Scalar;

/// The expansion of `g`: every super edge is replaced by a copy of its inner
/// graph rooted at the edge's tail, with the inner sink identified with the
/// edge's head. Flow through a super edge is routed along the inner flow,
/// scaled by the amount entering it.
pub fn expand<S: Scalar>(g: &LearningGraph<S>) -> Result<LearningGraph<S>> {
    if !g.has_super_edges() {
        return Ok(g.clone());
    }
    let mut labels = g.labels().to_vec();
    let mut edges: Vec<Edge<S>> = Vec::new();
    // For each original edge: its expanded edges and the inner flow map.
    let mut image: Vec<Vec<usize>> = Vec::with_capacity(g.edges().len());
    let mut inner_graphs: Vec<Option<LearningGraph<S>>> = Vec::with_capacity(g.edges().len());
    for edge in g.edges() {
        match &edge.kind {
            EdgeKind::Load { .. } | EdgeKind::Empty => {
                image.push(vec![edges.len()]);
                edges.push(edge.clone());
                inner_graphs.push(None);
            }
            EdgeKind::Super(s) => {
                let inner = expand(s.graph())?;
                let base = &g.labels()[edge.from];
                let vmap: Vec<usize> = (0..inner.vertex_count())
                    .map(|w| {
                        if w == inner.root() {
                            edge.from
                        } else if w == s.sink() {
                            edge.to
                        } else {
                            labels.push(base.union(inner.label(w)));
                            labels.len() - 1
                        }
                    })
                    .collect();
                let mut ids = Vec::with_capacity(inner.edges().len());
                for ie in inner.edges() {
                    let gate = match (&edge.gate, &ie.gate) {
                        (None, g) | (g, None) => g.clone(),
                        (Some(a), Some(b)) => Some(
                            a.merge(b)
                                .ok_or_else(|| Error::Malformed("conflicting gates while expanding".into()))?,
                        ),
                    };
                    ids.push(edges.len());
                    edges.push(Edge {
                        from: vmap[ie.from],
                        to: vmap[ie.to],
                        kind: ie.kind.clone(),
                        scale: edge.scale.clone() * ie.scale.clone(),
                        gate,
                    });
                }
                image.push(ids);
                inner_graphs.push(Some(inner));
            }
        }
    }

    let expand_flow = |y: Option<&crate::bits::Bits>, flow: &[(usize, S)]| -> Result<Vec<(usize, S)>> {
        let mut out = Vec::new();
        for (e, p) in flow {
            match &inner_graphs[*e] {
                None => out.push((image[*e][0], p.clone())),
                Some(inner) => {
                    let inner_flow = match (inner.flows(), y) {
                        (Flows::Universal(f), _) => f.as_slice(),
                        (Flows::PerInput(m), Some(y)) => m
                            .get(y)
                            .map(Vec::as_slice)
                            .ok_or_else(|| Error::Malformed(format!("super edge {e} has no flow for input {y}")))?,
                        (Flows::PerInput(_), None) => {
                            return Err(Error::Malformed(format!(
                                "super edge {e} needs per-input flows inside a universal flow"
                            )))
                        }
                    };
                    for (ie, q) in inner_flow {
                        out.push((image[*e][*ie], p.clone() * q.clone()));
                    }
                }
            }
        }
        Ok(out)
    };
    let flows = match g.flows() {
        Flows::Universal(f) => Flows::Universal(expand_flow(None, f)?),
        Flows::PerInput(m) => Flows::PerInput(
            m.iter()
                .map(|(y, f)| Ok((y.clone(), expand_flow(Some(y), f)?)))
                .collect::<Result<_>>()?,
        ),
    };
    let stages = g
        .stages()
        .iter()
        .map(|s| Stage {
            name: s.name.clone(),
            edges: s.edges.iter().flat_map(|&e| image[e].iter().copied()).collect(),
            provenance: s.provenance.clone(),
        })
        .collect();
    let mut out = LearningGraph::from_parts(g.n(), labels, g.root(), edges, flows, stages);
    out.normalize_flows();
    Ok(out)
}
