//! Structural and semantic checks that a graph is a learning graph for a function.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{BitSource, Bits, IndexSet, PartialAssignment};
use crate::complexity::edge_c1;
use crate::function::BooleanFunction;
use crate::graph::{Edge, EdgeKind, Flows, LearningGraph, SuperEdge};
use crate::load::LoadKind;
use crate::rule::WeightRule;
use crate::scalar::Scalar;

/// Assignment-bit cap for structural linking enumeration.
pub const STRUCTURAL_BIT_CAP: usize = 20;

const FLOW_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    DomainMismatch {
        graph_n: usize,
        function_n: usize,
    },
    RootLabel {
        label: Vec<usize>,
    },
    Cycle {
        vertex: usize,
    },
    Unreachable {
        vertex: usize,
    },
    IndexOutOfRange {
        vertex: Option<usize>,
        edge: Option<usize>,
        index: usize,
    },
    LabelIncrement {
        edge: usize,
        detail: String,
    },
    GateOutsideSource {
        edge: usize,
    },
    RuleReadsOutside {
        edge: usize,
        side: u8,
        indices: Vec<usize>,
    },
    NegativeWeight {
        edge: usize,
        value: f64,
    },
    Linking {
        edge: usize,
        assignment: String,
        c: u8,
        w0: f64,
        w1: f64,
    },
    LinkingUnchecked {
        edge: usize,
        bits: usize,
    },
    FlowMissing {
        input: String,
    },
    FlowOnNegative {
        input: String,
    },
    NegativeFlow {
        input: String,
        edge: usize,
        flow: f64,
    },
    FlowOnZeroWeight {
        input: String,
        edge: usize,
        flow: f64,
    },
    Conservation {
        input: String,
        vertex: usize,
        excess: f64,
    },
    RootOutflow {
        input: String,
        outflow: f64,
    },
    UncertifiedSink {
        input: String,
        vertex: usize,
        label: Vec<usize>,
    },
    NonUniqueSuperSink {
        edge: usize,
    },
    Evaluation {
        edge: Option<usize>,
        input: String,
        message: String,
    },
    InnerGraph {
        edge: usize,
        violation: Box<Violation>,
    },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Linking-condition mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkingMode {
    /// Only pairs realizable in the domain.
    Semantic,
    /// Every assignment of the indices the weights may read.
    Structural,
}

fn gate_open_on<B: BitSource + ?Sized>(edge: &Edge<impl Scalar>, z: &B) -> bool {
    edge.gate
        .as_ref()
        .is_none_or(|g| g.set().iter().zip(g.bits()).all(|(i, &b)| z.bit(i) == b))
}

fn effective<S: Scalar, B: BitSource + ?Sized>(edge: &Edge<S>, rule: &WeightRule<S>, z: &B) -> crate::Result<S> {
    if !gate_open_on(edge, z) {
        return Ok(S::zero());
    }
    Ok(edge.scale.clone() * rule.eval(z)?)
}

/// Checks the linking condition of one ordinary edge on every assignment of
/// the indices its weights and gate read.
pub fn check_linking_structural<S: Scalar>(e: usize, edge: &Edge<S>) -> Vec<Violation> {
    let EdgeKind::Load { index, w0, w1 } = &edge.kind else {
        return Vec::new();
    };
    let mut free = w0.reads().union(&w1.reads());
    if let Some(g) = &edge.gate {
        free = free.union(g.set());
    }
    let free = free.difference(&IndexSet::singleton(*index));
    if free.len() > STRUCTURAL_BIT_CAP {
        return vec![Violation::LinkingUnchecked {
            edge: e,
            bits: free.len(),
        }];
    }
    let mut out = Vec::new();
    for mask in 0..1u64 << free.len() {
        let bits: Vec<bool> = (0..free.len()).map(|k| mask >> k & 1 == 1).collect();
        let alpha = PartialAssignment::new(free.clone(), bits).expect("sizes match");
        for c in [false, true] {
            let a0 = alpha.with(*index, c);
            let a1 = alpha.with(*index, !c);
            match (effective(edge, w0, &a0), effective(edge, w1, &a1)) {
                (Ok(v0), Ok(v1)) => {
                    if !v0.close_to(&v1, 1e-12) {
                        out.push(Violation::Linking {
                            edge: e,
                            assignment: alpha.key(),
                            c: c.into(),
                            w0: v0.as_f64(),
                            w1: v1.as_f64(),
                        });
                    }
                }
                (Err(err), _) | (_, Err(err)) => out.push(Violation::Evaluation {
                    edge: Some(e),
                    input: alpha.key(),
                    message: err.to_string(),
                }),
            }
        }
    }
    out
}

/// Linking condition on pairs `(x, y)` realized in the domain.
fn check_linking_semantic<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction, e: usize) -> Vec<Violation> {
    let edge = g.edge(e);
    let EdgeKind::Load { index, w0, w1 } = &edge.kind else {
        return Vec::new();
    };
    let from = g.label(edge.from);
    // (α, z_j) → first negative weight / first positive weight seen.
    let mut neg: HashMap<(PartialAssignment, bool), S> = HashMap::new();
    let mut pos: HashMap<(PartialAssignment, bool), S> = HashMap::new();
    let mut out = Vec::new();
    for (k, z) in f.domain().iter().enumerate() {
        let key = (z.restrict(from), z.get(*index));
        let (table, rule) = if f.value_at(k) { (&mut pos, w1) } else { (&mut neg, w0) };
        if table.contains_key(&key) {
            continue;
        }
        match effective(edge, rule, z) {
            Ok(v) => {
                table.insert(key, v);
            }
            Err(err) => out.push(Violation::Evaluation {
                edge: Some(e),
                input: z.to_string(),
                message: err.to_string(),
            }),
        }
    }
    let mut keys: Vec<_> = neg.keys().cloned().collect();
    keys.sort();
    for (alpha, c) in keys {
        if let Some(v1) = pos.get(&(alpha.clone(), !c)) {
            let v0 = &neg[&(alpha.clone(), c)];
            if !v0.close_to(v1, 1e-12) {
                out.push(Violation::Linking {
                    edge: e,
                    assignment: alpha.key(),
                    c: c.into(),
                    w0: v0.as_f64(),
                    w1: v1.as_f64(),
                });
            }
        }
    }
    out
}

/// Checks the parts of the definition that do not involve the function:
/// acyclicity, reachability, label increments, rule supports, literals.
fn check_structure<S: Scalar>(g: &LearningGraph<S>, top_level: bool, out: &mut Vec<Violation>) {
    let n = g.n();
    if top_level && !g.label(g.root()).is_empty() {
        out.push(Violation::RootLabel {
            label: one_based(g.label(g.root())),
        });
    }
    for (v, label) in g.labels().iter().enumerate() {
        if let Some(i) = label.max().filter(|&i| i >= n) {
            out.push(Violation::IndexOutOfRange {
                vertex: Some(v),
                edge: None,
                index: i,
            });
        }
    }
    // Kahn's algorithm for cycles, BFS for reachability.
    let outs = g.out_edges();
    let mut indeg = vec![0usize; g.vertex_count()];
    for e in g.edges() {
        indeg[e.to] += 1;
    }
    let mut queue: VecDeque<usize> = (0..g.vertex_count()).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &e in &outs[v] {
            let to = g.edge(e).to;
            indeg[to] -= 1;
            if indeg[to] == 0 {
                queue.push_back(to);
            }
        }
    }
    if seen < g.vertex_count() {
        let v = indeg.iter().position(|&d| d > 0).expect("a vertex on a cycle");
        out.push(Violation::Cycle { vertex: v });
    }
    let mut reached = vec![false; g.vertex_count()];
    let mut stack = vec![g.root()];
    reached[g.root()] = true;
    while let Some(v) = stack.pop() {
        for &e in &outs[v] {
            let to = g.edge(e).to;
            if !reached[to] {
                reached[to] = true;
                stack.push(to);
            }
        }
    }
    for (v, r) in reached.iter().enumerate() {
        if !r {
            out.push(Violation::Unreachable { vertex: v });
        }
    }

    for (e, edge) in g.edges().iter().enumerate() {
        let from = g.label(edge.from);
        let to = g.label(edge.to);
        if edge.scale.as_f64() < 0.0 {
            out.push(Violation::NegativeWeight {
                edge: e,
                value: edge.scale.as_f64(),
            });
        }
        if let Some(gate) = &edge.gate {
            if !gate.set().is_subset(from) {
                out.push(Violation::GateOutsideSource { edge: e });
            }
        }
        match &edge.kind {
            EdgeKind::Load { index, w0, w1 } => {
                if *index >= n {
                    out.push(Violation::IndexOutOfRange {
                        vertex: None,
                        edge: Some(e),
                        index: *index,
                    });
                }
                if from.contains(*index) || *to != from.insert(*index) {
                    out.push(Violation::LabelIncrement {
                        edge: e,
                        detail: format!(
                            "loads {} but labels go {:?} -> {:?}",
                            index + 1,
                            one_based(from),
                            one_based(to)
                        ),
                    });
                }
                for (side, rule) in [(0u8, w0), (1u8, w1)] {
                    let outside = rule.reads().difference(to);
                    if !outside.is_empty() {
                        out.push(Violation::RuleReadsOutside {
                            edge: e,
                            side,
                            indices: one_based(&outside),
                        });
                    }
                    if let Some(m) = rule.min_literal().filter(|m| m.as_f64() < 0.0) {
                        out.push(Violation::NegativeWeight {
                            edge: e,
                            value: m.as_f64(),
                        });
                    }
                }
            }
            EdgeKind::Empty => {
                if from != to {
                    out.push(Violation::LabelIncrement {
                        edge: e,
                        detail: format!("empty transition between {:?} and {:?}", one_based(from), one_based(to)),
                    });
                }
            }
            EdgeKind::Super(s) => {
                let loads = s.loads();
                if loads.is_empty() || !loads.difference(from).eq(loads) || *to != from.union(loads) {
                    out.push(Violation::LabelIncrement {
                        edge: e,
                        detail: format!(
                            "super edge loads {:?} but labels go {:?} -> {:?}",
                            one_based(loads),
                            one_based(from),
                            one_based(to)
                        ),
                    });
                }
            }
        }
    }
}

fn one_based(set: &IndexSet) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

/// Flow checks for one input: sign, zero-weight edges, conservation, unit
/// outflow at the root. Returns the vertices where the flow terminates.
fn check_flow<S: Scalar>(g: &LearningGraph<S>, y: &Bits, flow: &[(usize, S)], out: &mut Vec<Violation>) -> Vec<usize> {
    let input = y.to_string();
    for (e, p) in flow {
        let pf = p.as_f64();
        if pf < 0.0 {
            out.push(Violation::NegativeFlow {
                input: input.clone(),
                edge: *e,
                flow: pf,
            });
        } else if pf > 0.0 {
            match edge_c1(g, *e, y) {
                Ok(None) => out.push(Violation::FlowOnZeroWeight {
                    input: input.clone(),
                    edge: *e,
                    flow: pf,
                }),
                Ok(Some(_)) => {}
                Err(err) => out.push(Violation::Evaluation {
                    edge: Some(*e),
                    input: input.clone(),
                    message: err.to_string(),
                }),
            }
        }
    }
    let net = g.net_outflow(flow);
    let root_out = net[g.root()].as_f64();
    if (root_out - 1.0).abs() > FLOW_TOL {
        out.push(Violation::RootOutflow {
            input: input.clone(),
            outflow: root_out,
        });
    }
    let mut sinks = Vec::new();
    for (v, x) in net.iter().enumerate() {
        let x = x.as_f64();
        if v == g.root() {
            continue;
        }
        if x > FLOW_TOL {
            out.push(Violation::Conservation {
                input: input.clone(),
                vertex: v,
                excess: x,
            });
        } else if x < -FLOW_TOL {
            sinks.push(v);
        }
    }
    sinks
}

/// Validation of a super edge's inner graph, with no function attached.
fn check_inner<S: Scalar>(s: &SuperEdge<S>) -> Vec<Violation> {
    let g = s.graph();
    let mut out = Vec::new();
    check_structure(g, true, &mut out);
    for (e, edge) in g.edges().iter().enumerate() {
        out.extend(check_linking_structural(e, edge));
        if let EdgeKind::Super(inner) = &edge.kind {
            out.extend(check_inner(inner).into_iter().map(|v| Violation::InnerGraph {
                edge: e,
                violation: Box::new(v),
            }));
        }
    }
    match g.flows() {
        Flows::Universal(flow) => {
            let y = Bits::zeros(g.n());
            check_flow(g, &y, flow, &mut out);
        }
        Flows::PerInput(m) => {
            for (y, flow) in m {
                check_flow(g, y, flow, &mut out);
            }
        }
    }
    if g.unique_sink().is_none_or(|v| v != s.sink()) {
        out.push(Violation::NonUniqueSuperSink { edge: usize::MAX });
    }
    out
}

/// Validates `g` as a learning graph for `f`; ordinary-edge linking is
/// checked on pairs realized in the domain.
pub fn validate<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction) -> ValidationReport {
    validate_with(g, f, LinkingMode::Semantic)
}

pub fn validate_with<S: Scalar>(g: &LearningGraph<S>, f: &BooleanFunction, mode: LinkingMode) -> ValidationReport {
    let mut out = Vec::new();
    if g.n() != f.n() {
        out.push(Violation::DomainMismatch {
            graph_n: g.n(),
            function_n: f.n(),
        });
        return ValidationReport { violations: out };
    }
    check_structure(g, true, &mut out);

    // Super edges: each distinct load gadget is checked once.
    let mut gadget_cache: BTreeMap<(LoadKind, IndexSet), bool> = BTreeMap::new();
    for (e, edge) in g.edges().iter().enumerate() {
        if let EdgeKind::Super(s) = &edge.kind {
            let key = s.load_kind().map(|(k, set)| (*k, set.clone()));
            if let Some(key) = &key {
                if gadget_cache.get(key) == Some(&true) {
                    continue;
                }
            }
            let inner = check_inner(s);
            if let Some(key) = key {
                gadget_cache.insert(key, inner.is_empty());
            }
            out.extend(inner.into_iter().map(|v| match v {
                Violation::NonUniqueSuperSink { .. } => Violation::NonUniqueSuperSink { edge: e },
                v => Violation::InnerGraph {
                    edge: e,
                    violation: Box::new(v),
                },
            }));
        }
    }

    let linking: Vec<Violation> = (0..g.edges().len())
        .into_par_iter()
        .flat_map_iter(|e| match mode {
            LinkingMode::Semantic => check_linking_semantic(g, f, e),
            LinkingMode::Structural => check_linking_structural(e, g.edge(e)),
        })
        .collect();
    out.extend(linking);

    let flows: Vec<Violation> = f
        .domain()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, z)| {
            let mut out = Vec::new();
            let positive = f.value_at(k);
            let flow = match g.flows() {
                Flows::PerInput(m) => m.get(z).map(Vec::as_slice),
                Flows::Universal(fl) => positive.then_some(fl.as_slice()),
            };
            match (positive, flow) {
                (false, Some(_)) => out.push(Violation::FlowOnNegative { input: z.to_string() }),
                (true, None) => out.push(Violation::FlowMissing { input: z.to_string() }),
                (true, Some(flow)) => {
                    for v in check_flow(g, z, flow, &mut out) {
                        if !f.is_certificate(z, g.label(v)) {
                            out.push(Violation::UncertifiedSink {
                                input: z.to_string(),
                                vertex: v,
                                label: one_based(g.label(v)),
                            });
                        }
                    }
                }
                (false, None) => {}
            }
            out
        })
        .collect();
    out.extend(flows);
    ValidationReport { violations: out }
}
