use serde::Serialize;

use crate::complexity::edge_c1;
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::{EdgeId, LearningGraph};
use crate::scalar::Scalar;

/// Outcome of rebalancing one stage.
#[derive(Clone, Debug, Serialize)]
pub struct SpecialityRebalance<S> {
    pub stage: String,
    pub n_total: usize,
    pub n_used: usize,
    /// `T = n_total / n_used`.
    pub speciality: f64,
    /// `λ_e = c¹(e)/n_used` applied to each non-empty edge.
    #[serde(skip)]
    pub factors: Vec<(EdgeId, S)>,
}

/// Rescales the edges of stage `stage` by `λ_e = c¹(e)/n_used`, where
/// `c¹(e)` is the largest positive edge-complexity over positive inputs and
/// every positive input sends flow `1/n_used` through exactly `n_used`
/// edges of the stage. Afterwards each positive input has stage `C¹ ≤ 1`.
pub fn rebalance_stage<S: Scalar>(
    g: &mut LearningGraph<S>,
    f: &BooleanFunction,
    stage: &str,
) -> Result<SpecialityRebalance<S>> {
    let edges = g
        .stages()
        .iter()
        .find(|s| s.name == stage)
        .ok_or_else(|| Error::Malformed(format!("no stage named \"{stage}\"")))?
        .edges
        .clone();
    let mut in_stage = vec![false; g.edges().len()];
    for &e in &edges {
        in_stage[e] = true;
    }
    let mut n_used: Option<usize> = None;
    for y in f.positives() {
        let flow: Vec<&S> = g
            .flow(y)
            .unwrap_or(&[])
            .iter()
            .filter(|(e, p)| in_stage[*e] && p.is_positive())
            .map(|(_, p)| p)
            .collect();
        let count = flow.len();
        if count == 0 {
            return Err(Error::NonUniformFlow(format!(
                "{y} sends no flow through stage \"{stage}\""
            )));
        }
        let share = S::one() / S::from_count(count);
        if let Some(p) = flow.iter().find(|p| !p.close_to(&share, 1e-9)) {
            return Err(Error::NonUniformFlow(format!(
                "{y} sends {} through an edge of stage \"{stage}\", expected 1/{count}",
                p.as_f64()
            )));
        }
        match n_used {
            Some(m) if m != count => {
                return Err(Error::NonUniformFlow(format!(
                    "{y} uses {count} edges of stage \"{stage}\", other inputs use {m}"
                )))
            }
            _ => n_used = Some(count),
        }
    }
    let n_used = n_used.ok_or(Error::DegenerateComplexity)?;
    let used = S::from_count(n_used);
    let positives: Vec<_> = f.positives().collect();
    let mut factors = Vec::with_capacity(edges.len());
    for &e in &edges {
        if g.edge(e).is_empty_transition() {
            continue;
        }
        let mut c1 = S::zero();
        for y in &positives {
            if let Some(c) = edge_c1(g, e, y)? {
                c1 = c1.max_of(c);
            }
        }
        let lambda = c1 / used.clone();
        factors.push((e, lambda));
    }
    for (e, lambda) in &factors {
        g.scale_edge(*e, lambda);
    }
    Ok(SpecialityRebalance {
        stage: stage.to_string(),
        n_total: edges.len(),
        n_used,
        speciality: edges.len() as f64 / n_used as f64,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{Bits, IndexSet};
    use crate::complexity::{complexity, negative_on};
    use crate::graph::{Edge, Stage};
    use crate::rule::WeightRule;

    /// Four parallel unit edges from the root, each loading its own bit;
    /// `f(z) = z₀`, flow through edge 0 only.
    #[test]
    fn four_parallel_edges_speciality_four() {
        let n = 4;
        let mut g: LearningGraph<f64> = LearningGraph::new(n, IndexSet::empty());
        let mut edges = Vec::new();
        for i in 0..n {
            let v = g.add_vertex(IndexSet::singleton(i));
            edges.push(g.add_edge(Edge::load(0, v, i, WeightRule::Const(1.0), WeightRule::Const(1.0))));
        }
        let f = BooleanFunction::from_predicate(
            n,
            BooleanFunction::full_domain(n),
            |z| z.get(0),
            |_| Some(IndexSet::singleton(0)),
        )
        .unwrap();
        for y in f.positives() {
            g.add_flow(y, 0, 1.0);
        }
        g.push_stage(Stage {
            name: "s".into(),
            edges,
            provenance: None,
        });
        let r = rebalance_stage(&mut g, &f, "s").unwrap();
        assert_eq!(r.n_used, 1);
        assert_eq!(r.speciality, 4.0);
        assert!(r.factors.iter().all(|(_, l)| *l == 1.0));
        assert_eq!(negative_on(&g, None, &Bits::zeros(4)).unwrap(), 4.0);
        assert!(*complexity(&g, &f, None).unwrap().c1() <= 1.0);
    }
}
