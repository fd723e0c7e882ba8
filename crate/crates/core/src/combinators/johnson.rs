use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::{binomial, k_subsets, pair_index, Bits, IndexSet, PartialAssignment};
use crate::complexity::{mask_of, negative_on};
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::{EdgeId, LearningGraph, Stage, VertexId};
use crate::load::LoadKind;
use crate::scalar::Scalar;

use super::{positive_complexity, rebalance_stage};

/// Monotone map from subsets of the ground set `[n]` to index sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum SetMap {
    /// `I(A) = A`.
    Identity,
    /// `I(A)` = positions of the vertex pairs `{u, v}` with `u ∈ x`,
    /// `v ∈ A`, `u ≠ v`, on `vertices` vertices. Ground element `i` is
    /// vertex `ground[i]` (vertex `i` when `ground` is empty).
    ProductWith {
        x: Vec<usize>,
        vertices: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ground: Vec<usize>,
    },
}

impl SetMap {
    pub fn apply(&self, a: &[usize]) -> IndexSet {
        match self {
            SetMap::Identity => IndexSet::new(a.iter().copied()),
            SetMap::ProductWith { x, vertices, ground } => {
                let vertex = |i: usize| if ground.is_empty() { i } else { ground[i] };
                IndexSet::new(x.iter().flat_map(|&u| {
                    a.iter()
                        .map(move |&i| vertex(i))
                        .filter(move |&v| v != u)
                        .map(move |v| pair_index(*vertices, u, v))
                }))
            }
        }
    }
}

/// Inner-graph factory: given a `k`-subset `A` and `f` restricted to the
/// inputs sharing one assignment of `S(A)`, returns `f_A` on those inputs
/// and a learning graph for it rooted at `S(A)`.
pub type InnerFactory<'a, S> =
    dyn Fn(&[usize], &BooleanFunction) -> Result<(BooleanFunction, LearningGraph<S>)> + Sync + 'a;

/// Certificate oracle: the `r`-subset `T_y` of the ground set for a positive `y`.
pub type CertOracle<'a> = dyn Fn(&Bits) -> Option<Vec<usize>> + Sync + 'a;

pub struct JohnsonSpec<'a, S> {
    /// Ground set size `n`.
    pub ground: usize,
    pub k: usize,
    pub r: usize,
    /// Label of the root; every vertex `A` is labelled `base ∪ I(A)`.
    pub base: IndexSet,
    pub set_map: SetMap,
    /// Load gadget used by stages `0..=r`.
    pub load_kinds: Vec<LoadKind>,
    pub certificate: &'a CertOracle<'a>,
    pub inner: &'a InnerFactory<'a, S>,
}

/// Terms of the Johnson bound `S² + (n/k)^r (k U² + C²)`, measured on
/// the negative inputs before rebalancing.
#[derive(Clone, Debug, Default, Serialize)]
pub struct JohnsonBound {
    pub s2: f64,
    pub u2: f64,
    pub c2: f64,
    pub n: usize,
    pub k: usize,
    pub r: usize,
}

impl JohnsonBound {
    pub fn value(&self) -> f64 {
        let ratio = self.n as f64 / self.k as f64;
        self.s2 + ratio.powi(self.r as i32) * (self.k as f64 * self.u2 + self.c2)
    }
}

#[derive(Clone, Debug)]
pub struct JohnsonComposition<S> {
    pub graph: LearningGraph<S>,
    pub bound: JohnsonBound,
    /// `C(n-r, k-r)`: edges used per stage by each positive input.
    pub n_used: usize,
}

pub fn stage_name(l: usize) -> String {
    format!("johnson-stage-{l}")
}

/// Learning graph for `f = ∨_{|A|=k} f_A` emulating a walk on the Johnson
/// graph `J(n, k)`.
///
/// Stage 0 loads `I(A')` for every `(k-r)`-subset; stages `1..=r` add one
/// ground element at a time; stage `r+1` plugs, at every `k`-subset `A` and
/// every realized assignment `λ` of `S(A)`, a copy of the inner graph gated
/// on `λ` and scaled by `C¹(G_{A,λ}) / C(n-r, k-r)`. A positive `y` with
/// certificate `T_y` flows uniformly over the `A' ∩ T_y = ∅`, then adds the
/// elements of `T_y` in order. Stages `0..=r` are rebalanced by speciality.
pub fn johnson_compose<S: Scalar>(spec: &JohnsonSpec<'_, S>, f: &BooleanFunction) -> Result<JohnsonComposition<S>> {
    let (n, k, r) = (spec.ground, spec.k, spec.r);
    if r > k || k > n {
        return Err(Error::InvalidParameters(format!(
            "need r <= k <= n, got r={r}, k={k}, n={n}"
        )));
    }
    if spec.load_kinds.len() != r + 1 {
        return Err(Error::InvalidParameters(format!(
            "{} load kinds given for {} load stages",
            spec.load_kinds.len(),
            r + 1
        )));
    }
    let n_used = binomial(n - r, k - r) as usize;
    let mut bound = JohnsonBound {
        n,
        k,
        r,
        ..Default::default()
    };
    let mut g = LearningGraph::new(f.n(), spec.base.clone());
    if f.count_positive() == 0 {
        return Ok(JohnsonComposition {
            graph: g,
            bound,
            n_used,
        });
    }
    let label_of = |a: &[usize]| spec.base.union(&spec.set_map.apply(a));

    // Vertices and load edges of stages 0..=r.
    let mut vertex: HashMap<Vec<usize>, VertexId> = HashMap::new();
    let mut stage0: HashMap<Vec<usize>, EdgeId> = HashMap::new();
    let mut step: HashMap<(Vec<usize>, usize), EdgeId> = HashMap::new();
    let mut stage_edges: Vec<Vec<EdgeId>> = vec![Vec::new(); r + 1];
    for a in k_subsets(n, k - r) {
        let label = label_of(&a);
        if a.is_empty() && label == spec.base {
            vertex.insert(a, g.root());
            continue;
        }
        let v = g.add_vertex(label);
        let e = g.connect_load(g.root(), v, spec.load_kinds[0]);
        stage_edges[0].push(e);
        stage0.insert(a.clone(), e);
        vertex.insert(a, v);
    }
    #[allow(clippy::needless_range_loop)]
    for l in 1..=r {
        for a in k_subsets(n, k - r + l - 1) {
            let from = vertex[&a];
            for j in (0..n).filter(|j| !a.contains(j)) {
                let mut b = a.clone();
                b.push(j);
                b.sort_unstable();
                let to = match vertex.get(&b) {
                    Some(&v) => v,
                    None => {
                        let v = g.add_vertex(label_of(&b));
                        vertex.insert(b.clone(), v);
                        v
                    }
                };
                if !g.label(from).is_subset(g.label(to)) {
                    return Err(Error::NonMonotone {
                        smaller: a.clone(),
                        larger: b,
                    });
                }
                let e = g.connect_load(from, to, spec.load_kinds[l]);
                stage_edges[l].push(e);
                step.insert((a.clone(), j), e);
            }
        }
    }

    // Certificates.
    let mut certs: BTreeMap<Bits, Vec<usize>> = BTreeMap::new();
    for y in f.positives() {
        let mut t = (spec.certificate)(y).ok_or_else(|| Error::CertificateSize {
            input: y.to_string(),
            found: 0,
            expected: r,
        })?;
        t.sort_unstable();
        t.dedup();
        if t.len() != r || t.iter().any(|&j| j >= n) {
            return Err(Error::CertificateSize {
                input: y.to_string(),
                found: t.len(),
                expected: r,
            });
        }
        certs.insert(y.clone(), t);
    }

    // Flows through stages 0..=r.
    let share = S::one() / S::from_count(n_used);
    for (y, t) in &certs {
        g.touch_flow(y);
        for a in k_subsets(n, k - r)
            .into_iter()
            .filter(|a| a.iter().all(|j| !t.contains(j)))
        {
            if let Some(&e) = stage0.get(&a) {
                g.add_flow(y, e, share.clone());
            }
            let mut cur = a;
            for &j in t {
                g.add_flow(y, step[&(cur.clone(), j)], share.clone());
                cur.push(j);
                cur.sort_unstable();
            }
        }
    }

    // Stage r+1: gated, scaled copies of the inner graphs.
    let last = stage_name(r + 1);
    let mut c2_acc: HashMap<Bits, f64> = HashMap::new();
    for a in k_subsets(n, k) {
        let v = vertex[&a];
        let label = g.label(v).clone();
        let fresh = label.difference(&spec.base);
        let mut groups: BTreeMap<PartialAssignment, Vec<usize>> = BTreeMap::new();
        for (idx, z) in f.domain().iter().enumerate() {
            groups.entry(z.restrict(&label)).or_default().push(idx);
        }
        for (lambda, idxs) in groups {
            let f_lambda = f.select(&idxs);
            let (f_a, child) = (spec.inner)(&a, &f_lambda)?;
            let f_a = f_a.restrict(|z| f_lambda.index_of(z).is_some());
            if f_a.len() != f_lambda.len() {
                return Err(Error::NotInDomain(format!("inner function for {a:?} misses inputs")));
            }
            if let Some(z) = f_a.positives().find(|z| !f_lambda.value(z).unwrap_or(false)) {
                return Err(Error::InconsistentSubfunction(format!(
                    "inner function for {a:?} is positive on negative input {z}"
                )));
            }
            if f_a.count_positive() == 0 {
                continue;
            }
            let c1 = positive_complexity(&child, &f_a)?;
            let c1f = c1.as_f64();
            for x in f_a.negatives().filter(|x| !f.value(x).unwrap_or(true)) {
                *c2_acc.entry(x.clone()).or_default() += negative_on(&child, None, x)?.as_f64() * c1f;
            }
            let scale = c1 / S::from_count(n_used);
            let gate = PartialAssignment::new(
                fresh.clone(),
                fresh.iter().map(|i| lambda.get(i).expect("in label")).collect(),
            )?;
            let gate = (!fresh.is_empty()).then_some(gate);
            let sp = g.splice(v, &child, &scale, gate.as_ref())?;
            g.merge_stage(&last, sp.edges(), Some("inner graphs scaled by C1/C(n-r,k-r)"));
            for st in child.stages() {
                g.merge_stage(
                    &format!("inner/{}", st.name),
                    st.edges.iter().map(|&e| sp.edge(e)),
                    st.provenance.as_deref(),
                );
            }
            for y in f_a.domain() {
                let Some(t) = certs.get(y) else { continue };
                if !t.iter().all(|j| a.contains(j)) {
                    continue;
                }
                if !f_a.value(y).unwrap_or(false) {
                    return Err(Error::InconsistentSubfunction(format!(
                        "f_A is 0 on {y} although A = {a:?} contains its certificate {t:?}"
                    )));
                }
                g.transfer_flow(&sp, &child, y, &share);
            }
        }
    }

    // Raw load-stage terms, then speciality rebalancing.
    let negatives: Vec<&Bits> = f.negatives().collect();
    let max_avg = |g: &LearningGraph<S>, edges: &[EdgeId], count: u128| -> Result<f64> {
        if edges.is_empty() || count == 0 {
            return Ok(0.0);
        }
        let mask = mask_of(g.edges().len(), edges);
        let mut best = 0f64;
        for x in &negatives {
            best = best.max(negative_on(g, Some(&mask), x)?.as_f64() / count as f64);
        }
        Ok(best)
    };
    bound.s2 = max_avg(&g, &stage_edges[0], binomial(n, k - r))?;
    for (l, edges) in stage_edges.iter().enumerate().skip(1) {
        let i = k - r + l - 1;
        bound.u2 = bound.u2.max(max_avg(&g, edges, binomial(n, i) * (n - i) as u128)?);
    }
    bound.c2 = c2_acc.values().fold(0f64, |m, &v| m.max(v)) / binomial(n, k) as f64;

    let mut stages: Vec<Stage> = stage_edges
        .into_iter()
        .enumerate()
        .map(|(l, edges)| Stage {
            name: stage_name(l),
            edges,
            provenance: Some("speciality-rebalanced".into()),
        })
        .collect();
    let rest: Vec<Stage> = g.stages().to_vec();
    g.clear_stages();
    for st in &stages {
        g.push_stage(st.clone());
    }
    for st in &mut stages {
        if !st.edges.is_empty() {
            let rb = rebalance_stage(&mut g, f, &st.name)?;
            if let Some(s) = g.stage_mut(&st.name) {
                s.provenance = Some(format!(
                    "speciality-rebalanced: T = {}/{} = {}",
                    rb.n_total, rb.n_used, rb.speciality
                ));
            }
        }
    }
    for st in rest {
        g.push_stage(st);
    }
    g.normalize_flows();
    Ok(JohnsonComposition {
        graph: g,
        bound,
        n_used,
    })
}
