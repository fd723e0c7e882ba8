//! The learning-graph data model: labelled DAG, dual weight rules, flows.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bits::{Bits, IndexSet, PartialAssignment};
use crate::error::{Error, Result};
use crate::load::{self, LoadKind};
use crate::rule::WeightRule;
use crate::scalar::Scalar;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug)]
pub enum EdgeKind<S> {
    /// Ordinary edge loading one index, with negative (`w0`) and positive
    /// (`w1`) weight rules.
    Load {
        index: usize,
        w0: WeightRule<S>,
        w1: WeightRule<S>,
    },
    /// Edge between two vertices with the same label. Never weighted and
    /// never counted in complexities; it may route flow.
    Empty,
    Super(Arc<SuperEdge<S>>),
}

/// An edge. Its effective weights are `scale · rule` where the `gate`
/// assignment (over indices of the source label) matches the input, and
/// zero elsewhere.
#[derive(Clone, Debug)]
pub struct Edge<S> {
    pub from: VertexId,
    pub to: VertexId,
    pub kind: EdgeKind<S>,
    pub scale: S,
    pub gate: Option<PartialAssignment>,
}

impl<S: Scalar> Edge<S> {
    pub fn load(from: VertexId, to: VertexId, index: usize, w0: WeightRule<S>, w1: WeightRule<S>) -> Self {
        Edge {
            from,
            to,
            kind: EdgeKind::Load { index, w0, w1 },
            scale: S::one(),
            gate: None,
        }
    }

    pub fn empty(from: VertexId, to: VertexId) -> Self {
        Edge {
            from,
            to,
            kind: EdgeKind::Empty,
            scale: S::one(),
            gate: None,
        }
    }

    pub fn gate_open(&self, z: &Bits) -> bool {
        self.gate.as_ref().is_none_or(|g| g.matches(z))
    }

    /// Indices this edge adds to the label.
    pub fn loads(&self) -> IndexSet {
        match &self.kind {
            EdgeKind::Load { index, .. } => IndexSet::singleton(*index),
            EdgeKind::Empty => IndexSet::empty(),
            EdgeKind::Super(s) => s.loads().clone(),
        }
    }

    pub fn is_empty_transition(&self) -> bool {
        matches!(self.kind, EdgeKind::Empty)
    }

    /// Effective weight on side `b` for input `z` (ordinary edges only).
    pub fn weight(&self, side: bool, z: &Bits) -> Result<S> {
        match &self.kind {
            EdgeKind::Load { w0, w1, .. } => {
                if !self.gate_open(z) {
                    return Ok(S::zero());
                }
                let rule = if side { w1 } else { w0 };
                Ok(self.scale.clone() * rule.eval(z)?)
            }
            _ => Ok(S::zero()),
        }
    }
}

/// A learning graph whose every flow ends at the same unique sink,
/// used as a single edge.
#[derive(Clone, Debug)]
pub struct SuperEdge<S> {
    graph: LearningGraph<S>,
    sink: VertexId,
    loads: IndexSet,
    kind: Option<(LoadKind, IndexSet)>,
}

impl<S: Scalar> SuperEdge<S> {
    /// Wraps `graph`, whose root must be labelled `∅`.
    pub fn from_graph(graph: LearningGraph<S>) -> Result<Self> {
        if !graph.labels[graph.root].is_empty() {
            return Err(Error::Malformed(
                "super edge graph root must be labelled by the empty set".into(),
            ));
        }
        let sink = graph.unique_sink().ok_or(Error::NonUniqueSink)?;
        let loads = graph.labels[sink].clone();
        Ok(SuperEdge {
            graph,
            sink,
            loads,
            kind: None,
        })
    }

    pub(crate) fn with_kind(mut self, kind: LoadKind, set: IndexSet) -> Self {
        self.kind = Some((kind, set));
        self
    }

    pub fn graph(&self) -> &LearningGraph<S> {
        &self.graph
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn loads(&self) -> &IndexSet {
        &self.loads
    }

    /// The load gadget this super edge was built as, if any.
    pub fn load_kind(&self) -> Option<&(LoadKind, IndexSet)> {
        self.kind.as_ref()
    }

    /// Negative edge-complexity `c⁰(e, z)`.
    pub fn c0(&self, z: &Bits) -> Result<S> {
        crate::complexity::negative_on(&self.graph, None, z)
    }

    /// Positive edge-complexity `c¹(e, z)`.
    pub fn c1(&self, z: &Bits) -> Result<S> {
        crate::complexity::positive_on(&self.graph, None, z)
    }
}

/// Flows of the positive inputs.
#[derive(Clone, Debug)]
pub enum Flows<S> {
    /// One flow per positive input.
    PerInput(BTreeMap<Bits, Vec<(EdgeId, S)>>),
    /// The same flow for every input (load gadgets).
    Universal(Vec<(EdgeId, S)>),
}

/// Named subset of edges analysed on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub edges: Vec<EdgeId>,
    pub provenance: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LearningGraph<S> {
    n: usize,
    labels: Vec<IndexSet>,
    root: VertexId,
    edges: Vec<Edge<S>>,
    flows: Flows<S>,
    stages: Vec<Stage>,
}

/// Where a spliced child graph landed.
#[derive(Clone, Debug)]
pub struct Splice {
    pub vertices: Vec<VertexId>,
    pub edge_offset: EdgeId,
    pub edge_count: usize,
}

impl Splice {
    pub fn edge(&self, child_edge: EdgeId) -> EdgeId {
        self.edge_offset + child_edge
    }

    pub fn edges(&self) -> std::ops::Range<EdgeId> {
        self.edge_offset..self.edge_offset + self.edge_count
    }
}

impl<S: Scalar> LearningGraph<S> {
    /// A graph with a single root vertex labelled `base`.
    pub fn new(n: usize, base: IndexSet) -> Self {
        LearningGraph {
            n,
            labels: vec![base],
            root: 0,
            edges: Vec::new(),
            flows: Flows::PerInput(BTreeMap::new()),
            stages: Vec::new(),
        }
    }

    pub(crate) fn from_parts(
        n: usize,
        labels: Vec<IndexSet>,
        root: VertexId,
        edges: Vec<Edge<S>>,
        flows: Flows<S>,
        stages: Vec<Stage>,
    ) -> Self {
        LearningGraph {
            n,
            labels,
            root,
            edges,
            flows,
            stages,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[IndexSet] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &IndexSet {
        &self.labels[v]
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge<S> {
        &self.edges[e]
    }

    pub fn edge_mut(&mut self, e: EdgeId) -> &mut Edge<S> {
        &mut self.edges[e]
    }

    pub fn flows(&self) -> &Flows<S> {
        &self.flows
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn push_stage(&mut self, stage: Stage) {
        self.stages.push(stage);
    }

    /// Adds `edges` to the stage called `name`, creating it if needed.
    pub fn merge_stage(&mut self, name: &str, edges: impl IntoIterator<Item = EdgeId>, provenance: Option<&str>) {
        let idx = match self.stages.iter().position(|s| s.name == name) {
            Some(i) => i,
            None => {
                self.stages.push(Stage {
                    name: name.to_string(),
                    edges: Vec::new(),
                    provenance: provenance.map(str::to_string),
                });
                self.stages.len() - 1
            }
        };
        self.stages[idx].edges.extend(edges);
    }

    pub fn stage_mut(&mut self, name: &str) -> Option<&mut Stage> {
        self.stages.iter_mut().find(|s| s.name == name)
    }

    pub fn clear_stages(&mut self) {
        self.stages.clear();
    }

    pub fn has_super_edges(&self) -> bool {
        self.edges.iter().any(|e| matches!(e.kind, EdgeKind::Super(_)))
    }

    /// Flow of `y`, or `None` when `y` has no flow.
    pub fn flow(&self, y: &Bits) -> Option<&[(EdgeId, S)]> {
        match &self.flows {
            Flows::PerInput(m) => m.get(y).map(Vec::as_slice),
            Flows::Universal(f) => Some(f),
        }
    }

    pub fn add_vertex(&mut self, label: IndexSet) -> VertexId {
        self.labels.push(label);
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, edge: Edge<S>) -> EdgeId {
        self.edges.push(edge);
        self.edges.len() - 1
    }

    /// Adds `amount` of `y`'s flow on edge `e`.
    pub fn add_flow(&mut self, y: &Bits, e: EdgeId, amount: S) {
        match &mut self.flows {
            Flows::PerInput(m) => m.entry(y.clone()).or_default().push((e, amount)),
            Flows::Universal(_) => panic!("cannot add per-input flow to a universal flow"),
        }
    }

    /// Declares that `y` has a (possibly edgeless) flow.
    pub fn touch_flow(&mut self, y: &Bits) {
        if let Flows::PerInput(m) = &mut self.flows {
            m.entry(y.clone()).or_default();
        }
    }

    pub fn set_universal_flow(&mut self, flow: Vec<(EdgeId, S)>) {
        self.flows = Flows::Universal(flow);
    }

    /// Merges repeated edge entries and sorts each flow by edge index.
    pub fn normalize_flows(&mut self) {
        let merge = |v: &mut Vec<(EdgeId, S)>| {
            v.sort_by_key(|p| p.0);
            let mut out: Vec<(EdgeId, S)> = Vec::with_capacity(v.len());
            for (e, a) in v.drain(..) {
                match out.last_mut() {
                    Some(last) if last.0 == e => last.1 = last.1.clone() + a,
                    _ => out.push((e, a)),
                }
            }
            *v = out;
        };
        match &mut self.flows {
            Flows::PerInput(m) => m.values_mut().for_each(merge),
            Flows::Universal(f) => merge(f),
        }
    }

    /// Adds a new vertex reached from `from` by loading `set ∖ S(from)`.
    ///
    /// Nothing new to load gives an empty transition.
    pub fn add_load(&mut self, from: VertexId, set: &IndexSet, kind: LoadKind) -> (VertexId, EdgeId) {
        let label = self.labels[from].union(set);
        let to = self.add_vertex(label);
        let e = self.connect_load(from, to, kind);
        (to, e)
    }

    /// Connects two existing vertices with a load of `S(to) ∖ S(from)`.
    pub fn connect_load(&mut self, from: VertexId, to: VertexId, kind: LoadKind) -> EdgeId {
        let missing = self.labels[to].difference(&self.labels[from]);
        if missing.is_empty() {
            return self.add_edge(Edge::empty(from, to));
        }
        let gadget = load::load(kind, &missing);
        self.add_edge(Edge {
            from,
            to,
            kind: EdgeKind::Super(Arc::new(gadget)),
            scale: S::one(),
            gate: None,
        })
    }

    /// Copies `child` into this graph, identifying its root with `at`.
    ///
    /// Child weights are multiplied by `scale` and gated by `gate`; flows
    /// are not copied (see [`LearningGraph::transfer_flow`]).
    pub fn splice(
        &mut self,
        at: VertexId,
        child: &LearningGraph<S>,
        scale: &S,
        gate: Option<&PartialAssignment>,
    ) -> Result<Splice> {
        if child.labels[child.root] != self.labels[at] {
            return Err(Error::Malformed(format!(
                "spliced graph root label {:?} differs from vertex label {:?}",
                child.labels[child.root].as_slice(),
                self.labels[at].as_slice()
            )));
        }
        let mut vertices = Vec::with_capacity(child.labels.len());
        for (v, label) in child.labels.iter().enumerate() {
            if v == child.root {
                vertices.push(at);
            } else {
                vertices.push(self.add_vertex(label.clone()));
            }
        }
        let edge_offset = self.edges.len();
        for e in &child.edges {
            let gate = match (gate, &e.gate) {
                (None, g) => g.clone(),
                (Some(g), None) => Some(g.clone()),
                (Some(a), Some(b)) => Some(
                    a.merge(b)
                        .ok_or_else(|| Error::Malformed("conflicting gates while splicing".into()))?,
                ),
            };
            self.edges.push(Edge {
                from: vertices[e.from],
                to: vertices[e.to],
                kind: e.kind.clone(),
                scale: scale.clone() * e.scale.clone(),
                gate,
            });
        }
        Ok(Splice {
            vertices,
            edge_offset,
            edge_count: child.edges.len(),
        })
    }

    /// Adds `factor` times the child's flow for `y` along a splice.
    pub fn transfer_flow(&mut self, splice: &Splice, child: &LearningGraph<S>, y: &Bits, factor: &S) {
        self.touch_flow(y);
        if let Some(flow) = child.flow(y) {
            for (e, p) in flow {
                self.add_flow(y, splice.edge(*e), factor.clone() * p.clone());
            }
        }
    }

    /// Multiplies both weight sides of every edge by `factor`.
    pub fn scale_all(&mut self, factor: &S) {
        for e in &mut self.edges {
            e.scale = e.scale.clone() * factor.clone();
        }
    }

    pub fn scale_edge(&mut self, e: EdgeId, factor: &S) {
        let edge = &mut self.edges[e];
        edge.scale = edge.scale.clone() * factor.clone();
    }

    /// Net outflow per vertex for a flow.
    pub fn net_outflow(&self, flow: &[(EdgeId, S)]) -> Vec<S> {
        let mut net = vec![S::zero(); self.labels.len()];
        for (e, p) in flow {
            let edge = &self.edges[*e];
            net[edge.from] = net[edge.from].clone() + p.clone();
            net[edge.to] = net[edge.to].clone() - p.clone();
        }
        net
    }

    /// Vertices where a flow terminates (net inflow above `tol`).
    pub fn flow_sinks(&self, flow: &[(EdgeId, S)], tol: f64) -> Vec<VertexId> {
        self.net_outflow(flow)
            .iter()
            .enumerate()
            .filter(|(_, v)| v.as_f64() < -tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// The single vertex every flow ends at; the root for a graph
    /// without flow-carrying edges.
    pub fn unique_sink(&self) -> Option<VertexId> {
        let sink_of = |flow: &[(EdgeId, S)]| -> Option<VertexId> {
            let sinks = self.flow_sinks(flow, 1e-12);
            match sinks.len() {
                0 if flow.iter().all(|(_, p)| p.as_f64() == 0.0) => Some(self.root),
                1 => Some(sinks[0]),
                _ => None,
            }
        };
        match &self.flows {
            Flows::Universal(f) => sink_of(f),
            Flows::PerInput(m) => {
                let mut found = None;
                for flow in m.values() {
                    let s = sink_of(flow)?;
                    if found.is_some_and(|f| f != s) {
                        return None;
                    }
                    found = Some(s);
                }
                Some(found.unwrap_or(self.root))
            }
        }
    }

    /// Outgoing edge lists.
    pub fn out_edges(&self) -> Vec<Vec<EdgeId>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        out
    }

    /// Number of edges after expanding every super edge (empty transitions excluded).
    pub fn expanded_edge_count(&self) -> usize {
        self.edges
            .iter()
            .map(|e| match &e.kind {
                EdgeKind::Load { .. } => 1,
                EdgeKind::Empty => 0,
                EdgeKind::Super(s) => s.graph.expanded_edge_count(),
            })
            .sum()
    }
}
