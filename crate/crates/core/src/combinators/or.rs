use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::LearningGraph;
use crate::scalar::Scalar;

use super::{positive_complexity, value_of};

/// One disjunct: a function over (a superset of) the parent domain and a
/// learning graph for it, rooted at the common base label.
#[derive(Clone, Debug)]
pub struct OrChild<S> {
    pub function: BooleanFunction,
    pub graph: LearningGraph<S>,
}

#[derive(Clone, Debug)]
pub struct OrComposition<S> {
    pub graph: LearningGraph<S>,
    /// Scale applied to each child, `C¹(Gᵢ)/k`.
    pub lambdas: Vec<S>,
    /// `C¹(Gᵢ)` of each child before scaling.
    pub child_c1: Vec<S>,
}

/// Learning graph for `f = ∨ fᵢ`, given that every positive input of `f`
/// is positive for at least `k` children.
///
/// All children share one root (labelled like theirs). Child `i` is scaled
/// by `λᵢ = C¹(Gᵢ)/k`; a positive input sends `1/k` of its flow into each
/// of its first `k` positive children.
pub fn or_compose<S: Scalar>(f: &BooleanFunction, children: &[OrChild<S>], k: usize) -> Result<OrComposition<S>> {
    if k == 0 {
        return Err(Error::InvalidParameters("OR needs k >= 1".into()));
    }
    let base = match children.first() {
        Some(c) => c.graph.label(c.graph.root()).clone(),
        None => return Err(Error::InvalidParameters("OR of no children".into())),
    };
    let mut child_c1 = Vec::with_capacity(children.len());
    for (i, c) in children.iter().enumerate() {
        if c.graph.n() != f.n() || c.function.n() != f.n() {
            return Err(Error::Malformed(format!("OR child {i} has a different input length")));
        }
        if *c.graph.label(c.graph.root()) != base {
            return Err(Error::Malformed(format!("OR child {i} has a different root label")));
        }
        let restricted = c.function.restrict(|z| f.index_of(z).is_some());
        if restricted.len() != f.len() {
            return Err(Error::NotInDomain(format!(
                "OR child {i} is not defined on the whole domain"
            )));
        }
        child_c1.push(positive_complexity(&c.graph, &restricted)?);
    }
    let kk = S::from_count(k);
    let lambdas: Vec<S> = child_c1.iter().map(|c| c.clone() / kk.clone()).collect();

    let mut g = LearningGraph::new(f.n(), base);
    let root = g.root();
    let mut splices = Vec::with_capacity(children.len());
    for (c, lambda) in children.iter().zip(&lambdas) {
        let sp = g.splice(root, &c.graph, lambda, None)?;
        for st in c.graph.stages() {
            g.merge_stage(&st.name, st.edges.iter().map(|&e| sp.edge(e)), st.provenance.as_deref());
        }
        splices.push(sp);
    }
    let share = S::one() / kk;
    for (idx, z) in f.domain().iter().enumerate() {
        let positive_children: Vec<usize> = children
            .iter()
            .enumerate()
            .map(|(i, c)| value_of(&c.function, z).map(|v| (i, v)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.1)
            .map(|p| p.0)
            .collect();
        if !f.value_at(idx) {
            if let Some(&i) = positive_children.first() {
                return Err(Error::InconsistentSubfunction(format!(
                    "child {i} is positive on negative input {z}"
                )));
            }
            continue;
        }
        if positive_children.len() < k {
            return Err(Error::OrGuarantee {
                input: z.to_string(),
                found: positive_children.len(),
                k,
            });
        }
        g.touch_flow(z);
        for &i in &positive_children[..k] {
            g.transfer_flow(&splices[i], &children[i].graph, z, &share);
        }
    }
    g.normalize_flows();
    Ok(OrComposition {
        graph: g,
        lambdas,
        child_c1,
    })
}
