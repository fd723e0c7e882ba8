//! JSON interchange for graphs, functions and reports.
//!
//! Data indices (labels, loaded positions, certificates, assignment keys)
//! are 1-based; vertex ids are free-form; edge positions are 0-based.
//! Output is canonical: sorted keys, shortest round-trip floats.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde_json::{json, Map, Number, Value};

use crate::bits::{Bits, IndexSet, PartialAssignment};
use crate::complexity::{ComplexityReport, StageReport};
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::{Edge, EdgeKind, Flows, LearningGraph, Stage, SuperEdge};
use crate::load::{self, LoadKind};
use crate::rule::WeightRule;
use crate::scalar::Scalar;

/// Pretty-printed canonical text of a JSON value, newline-terminated.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn malformed(at: &str, msg: impl std::fmt::Display) -> Error {
    Error::Malformed(format!("{at}: {msg}"))
}

fn num<S: Scalar>(v: &S) -> Result<Value> {
    Number::from_f64(v.as_f64())
        .map(Value::Number)
        .ok_or_else(|| Error::Malformed(format!("non-finite number {v:?}")))
}

fn read_num<S: Scalar>(v: &Value, at: &str) -> Result<S> {
    let f = v.as_f64().ok_or_else(|| malformed(at, "expected a number"))?;
    S::from_f64(f).ok_or_else(|| malformed(at, format!("{f} is not representable")))
}

pub fn index_set_to_json(s: &IndexSet) -> Value {
    Value::Array(s.iter().map(|i| json!(i + 1)).collect())
}

pub fn index_set_from_json(v: &Value, n: usize, at: &str) -> Result<IndexSet> {
    let arr = v
        .as_array()
        .ok_or_else(|| malformed(at, "expected an array of indices"))?;
    let mut out = Vec::with_capacity(arr.len());
    for x in arr {
        let i = x
            .as_u64()
            .ok_or_else(|| malformed(at, "indices are positive integers"))? as usize;
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        out.push(i - 1);
    }
    Ok(IndexSet::new(out))
}

pub fn rule_to_json<S: Scalar>(r: &WeightRule<S>) -> Result<Value> {
    Ok(match r {
        WeightRule::Const(v) => num(v)?,
        WeightRule::DenseLoad { size } => json!({"rule": "dense-load", "size": size}),
        WeightRule::SparseLoad {
            prefix,
            index,
            total,
            side,
        } => json!({
            "rule": "sparse-load",
            "prefix": index_set_to_json(prefix),
            "index": index + 1,
            "total": total,
            "side": u8::from(*side),
        }),
        WeightRule::Table { set, entries } => {
            let mut m = Map::new();
            for (k, v) in entries {
                m.insert(k.key(), num(v)?);
            }
            json!({"rule": "table", "set": index_set_to_json(set), "entries": m})
        }
        WeightRule::Override { base, at, value } => json!({
            "rule": "override",
            "base": rule_to_json(base)?,
            "at": at.key(),
            "value": num(value)?,
        }),
    })
}

pub fn rule_from_json<S: Scalar>(v: &Value, n: usize, at: &str) -> Result<WeightRule<S>> {
    if v.is_number() {
        return Ok(WeightRule::Const(read_num(v, at)?));
    }
    let o = v
        .as_object()
        .ok_or_else(|| malformed(at, "a weight rule is a number or an object"))?;
    let field = |k: &str| o.get(k).ok_or_else(|| malformed(at, format!("missing \"{k}\"")));
    let count = |k: &str| -> Result<usize> {
        field(k)?
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| malformed(at, format!("\"{k}\" must be a nonnegative integer")))
    };
    let key = |k: &str| -> Result<PartialAssignment> {
        let p = PartialAssignment::parse_key(
            field(k)?
                .as_str()
                .ok_or_else(|| malformed(at, "expected a key string"))?,
        )?;
        check_assignment(&p, n)?;
        Ok(p)
    };
    match field("rule")?.as_str() {
        Some("dense-load") => Ok(WeightRule::DenseLoad { size: count("size")? }),
        Some("sparse-load") => {
            let index = count("index")?;
            if index == 0 || index > n {
                return Err(Error::IndexOutOfRange { index, n });
            }
            let side = match count("side")? {
                0 => false,
                1 => true,
                s => return Err(malformed(at, format!("side must be 0 or 1, got {s}"))),
            };
            Ok(WeightRule::SparseLoad {
                prefix: index_set_from_json(field("prefix")?, n, at)?,
                index: index - 1,
                total: count("total")?,
                side,
            })
        }
        Some("table") => {
            let set = index_set_from_json(field("set")?, n, at)?;
            let raw = field("entries")?
                .as_object()
                .ok_or_else(|| malformed(at, "\"entries\" must be an object"))?;
            let mut entries = BTreeMap::new();
            for (k, v) in raw {
                let p = PartialAssignment::parse_key(k)?;
                if *p.set() != set {
                    return Err(malformed(
                        at,
                        format!("table key \"{k}\" is not an assignment of the table set"),
                    ));
                }
                entries.insert(p, read_num(v, at)?);
            }
            Ok(WeightRule::Table { set, entries })
        }
        Some("override") => Ok(WeightRule::Override {
            base: Box::new(rule_from_json(field("base")?, n, at)?),
            at: key("at")?,
            value: read_num(field("value")?, at)?,
        }),
        other => Err(malformed(at, format!("unknown rule {other:?}"))),
    }
}

fn check_assignment(p: &PartialAssignment, n: usize) -> Result<()> {
    match p.set().max() {
        Some(i) if i >= n => Err(Error::IndexOutOfRange { index: i + 1, n }),
        _ => Ok(()),
    }
}

fn flow_to_json<S: Scalar>(flow: &[(usize, S)]) -> Result<Value> {
    let mut m = Map::new();
    for (e, p) in flow {
        m.insert(e.to_string(), num(p)?);
    }
    Ok(Value::Object(m))
}

pub fn graph_to_json<S: Scalar>(g: &LearningGraph<S>) -> Result<Value> {
    let vertices: Vec<Value> = g
        .labels()
        .iter()
        .enumerate()
        .map(|(v, l)| json!({"id": v, "label": index_set_to_json(l)}))
        .collect();
    let mut edges = Vec::with_capacity(g.edges().len());
    for e in g.edges() {
        let mut o = Map::new();
        o.insert("from".into(), json!(e.from));
        o.insert("to".into(), json!(e.to));
        match &e.kind {
            EdgeKind::Load { index, w0, w1 } => {
                o.insert("loads".into(), json!(index + 1));
                o.insert("w0".into(), rule_to_json(w0)?);
                o.insert("w1".into(), rule_to_json(w1)?);
            }
            EdgeKind::Empty => {
                o.insert("loads".into(), Value::Null);
            }
            EdgeKind::Super(s) => {
                let payload = match s.load_kind() {
                    Some((kind, set)) => json!({"load": kind, "set": index_set_to_json(set)}),
                    None => json!({"super": graph_to_json(s.graph())?}),
                };
                o.insert("loads".into(), payload);
            }
        }
        if !(e.scale == S::one()) {
            o.insert("scale".into(), num(&e.scale)?);
        }
        if let Some(gate) = &e.gate {
            o.insert("gate".into(), json!(gate.key()));
        }
        edges.push(Value::Object(o));
    }
    let mut out = Map::new();
    out.insert("n".into(), json!(g.n()));
    out.insert("root".into(), json!(g.root()));
    out.insert("vertices".into(), Value::Array(vertices));
    out.insert("edges".into(), Value::Array(edges));
    match g.flows() {
        Flows::PerInput(map) => {
            let mut m = Map::new();
            for (y, flow) in map {
                m.insert(y.to_string(), flow_to_json(flow)?);
            }
            out.insert("flows".into(), Value::Object(m));
        }
        Flows::Universal(flow) => {
            out.insert("universal_flow".into(), flow_to_json(flow)?);
        }
    }
    if !g.stages().is_empty() {
        let stages: Vec<Value> = g
            .stages()
            .iter()
            .map(|s| {
                let mut o = json!({"name": s.name, "edges": s.edges});
                if let Some(p) = &s.provenance {
                    o["provenance"] = json!(p);
                }
                o
            })
            .collect();
        out.insert("stages".into(), Value::Array(stages));
    }
    Ok(Value::Object(out))
}

fn vertex_key(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => n.as_u64().map(|k| k.to_string()),
        _ => None,
    }
}

fn read_flow<S: Scalar>(v: &Value, edges: usize, at: &str) -> Result<Vec<(usize, S)>> {
    let o = v
        .as_object()
        .ok_or_else(|| malformed(at, "a flow is an object from edge position to value"))?;
    let mut out = Vec::with_capacity(o.len());
    for (k, p) in o {
        let e: usize = k
            .parse()
            .map_err(|_| malformed(at, format!("bad edge position \"{k}\"")))?;
        if e >= edges {
            return Err(malformed(at, format!("edge position {e} out of range ({edges} edges)")));
        }
        out.push((e, read_num(p, at)?));
    }
    out.sort_by_key(|p| p.0);
    Ok(out)
}

/// Builds a graph from its JSON form, rejecting dangling vertex
/// references, out-of-range indices and negative weight literals.
pub fn graph_from_json<S: Scalar>(v: &Value) -> Result<LearningGraph<S>> {
    let o = v.as_object().ok_or_else(|| malformed("graph", "expected an object"))?;
    let n = o
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("graph", "missing \"n\""))? as usize;
    let vs = o
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("graph", "missing \"vertices\""))?;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(vs.len());
    for (k, vx) in vs.iter().enumerate() {
        let at = format!("vertex {k}");
        let id = vx
            .get("id")
            .and_then(vertex_key)
            .ok_or_else(|| malformed(&at, "missing id"))?;
        if ids.insert(id.clone(), k).is_some() {
            return Err(malformed(&at, format!("duplicate id {id}")));
        }
        labels.push(index_set_from_json(vx.get("label").unwrap_or(&json!([])), n, &at)?);
    }
    if labels.is_empty() {
        return Err(malformed("graph", "no vertices"));
    }
    let root = match o.get("root") {
        Some(r) => {
            let key = vertex_key(r).ok_or_else(|| malformed("root", "bad vertex id"))?;
            *ids.get(&key).ok_or(Error::DanglingVertex {
                edge: usize::MAX,
                vertex: key,
            })?
        }
        None => 0,
    };
    let es = o.get("edges").and_then(Value::as_array).cloned().unwrap_or_default();
    let mut edges = Vec::with_capacity(es.len());
    for (k, ex) in es.iter().enumerate() {
        let at = format!("edge {k}");
        let end = |name: &str| -> Result<usize> {
            let key = ex
                .get(name)
                .and_then(vertex_key)
                .ok_or_else(|| malformed(&at, format!("missing \"{name}\"")))?;
            ids.get(&key)
                .copied()
                .ok_or(Error::DanglingVertex { edge: k, vertex: key })
        };
        let (from, to) = (end("from")?, end("to")?);
        let kind = match ex.get("loads").unwrap_or(&Value::Null) {
            Value::Null => EdgeKind::Empty,
            Value::Number(j) => {
                let j = j
                    .as_u64()
                    .ok_or_else(|| malformed(&at, "\"loads\" must be a positive integer"))?
                    as usize;
                if j == 0 || j > n {
                    return Err(Error::IndexOutOfRange { index: j, n });
                }
                let rule = |side: &str| -> Result<WeightRule<S>> {
                    let r = rule_from_json(
                        ex.get(side)
                            .ok_or_else(|| malformed(&at, format!("missing \"{side}\"")))?,
                        n,
                        &at,
                    )?;
                    if let Some(m) = r.min_literal().filter(|m: &S| *m < S::zero()) {
                        return Err(Error::NegativeWeight {
                            edge: k,
                            value: m.as_f64(),
                        });
                    }
                    Ok(r)
                };
                EdgeKind::Load {
                    index: j - 1,
                    w0: rule("w0")?,
                    w1: rule("w1")?,
                }
            }
            Value::Object(p) => {
                let gadget = if let Some(kind) = p.get("load") {
                    let kind: LoadKind = serde_json::from_value(kind.clone())
                        .map_err(|e| malformed(&at, format!("bad load kind: {e}")))?;
                    let set = index_set_from_json(p.get("set").unwrap_or(&json!([])), n, &at)?;
                    load::load(kind, &set)
                } else if let Some(inner) = p.get("super") {
                    SuperEdge::from_graph(graph_from_json(inner).map_err(|e| malformed(&at, e))?)?
                } else {
                    return Err(malformed(&at, "\"loads\" object needs \"load\" or \"super\""));
                };
                if gadget.loads().max().is_some_and(|i| i >= n) {
                    return Err(Error::IndexOutOfRange {
                        index: gadget.loads().max().unwrap_or(0) + 1,
                        n,
                    });
                }
                EdgeKind::Super(Arc::new(gadget))
            }
            _ => return Err(malformed(&at, "\"loads\" must be an index, null or an object")),
        };
        let scale = match ex.get("scale") {
            Some(s) => read_num(s, &at)?,
            None => S::one(),
        };
        if scale < S::zero() {
            return Err(Error::NegativeWeight {
                edge: k,
                value: scale.as_f64(),
            });
        }
        let gate = match ex.get("gate") {
            Some(g) => {
                let p = PartialAssignment::parse_key(
                    g.as_str().ok_or_else(|| malformed(&at, "gate must be a key string"))?,
                )?;
                check_assignment(&p, n)?;
                Some(p)
            }
            None => None,
        };
        edges.push(Edge {
            from,
            to,
            kind,
            scale,
            gate,
        });
    }
    let flows = if let Some(u) = o.get("universal_flow") {
        Flows::Universal(read_flow(u, edges.len(), "universal_flow")?)
    } else {
        let mut map = BTreeMap::new();
        if let Some(f) = o.get("flows") {
            let f = f.as_object().ok_or_else(|| malformed("flows", "expected an object"))?;
            for (y, flow) in f {
                let bits: Bits = y.parse()?;
                if bits.len() != n {
                    return Err(malformed("flows", format!("input {y} has length != {n}")));
                }
                map.insert(bits, read_flow(flow, edges.len(), &format!("flow of {y}"))?);
            }
        }
        Flows::PerInput(map)
    };
    let mut stages = Vec::new();
    if let Some(ss) = o.get("stages").and_then(Value::as_array) {
        for (k, s) in ss.iter().enumerate() {
            let at = format!("stage {k}");
            let name = s
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed(&at, "missing name"))?;
            let list = s
                .get("edges")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed(&at, "missing edges"))?;
            let mut es = Vec::with_capacity(list.len());
            for e in list {
                let e = e.as_u64().map(|e| e as usize).filter(|&e| e < edges.len());
                es.push(e.ok_or_else(|| malformed(&at, "edge position out of range"))?);
            }
            stages.push(Stage {
                name: name.into(),
                edges: es,
                provenance: s.get("provenance").and_then(Value::as_str).map(String::from),
            });
        }
    }
    Ok(LearningGraph::from_parts(n, labels, root, edges, flows, stages))
}

pub fn function_to_json(f: &BooleanFunction) -> Value {
    let values: String = f.values().iter().map(|&v| if v { '1' } else { '0' }).collect();
    let mut certs = Map::new();
    for (&k, set) in f.certs() {
        certs.insert(f.domain()[k].to_string(), index_set_to_json(set));
    }
    json!({
        "n": f.n(),
        "domain": f.domain().iter().map(|z| z.to_string()).collect::<Vec<_>>(),
        "values": values,
        "certs": certs,
    })
}

pub fn function_from_json(v: &Value) -> Result<BooleanFunction> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("function", "missing \"n\""))? as usize;
    let domain = v
        .get("domain")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("function", "missing \"domain\""))?
        .iter()
        .map(|z| {
            z.as_str()
                .ok_or_else(|| malformed("domain", "inputs are bit strings"))?
                .parse::<Bits>()
        })
        .collect::<Result<Vec<_>>>()?;
    let values = v
        .get("values")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("function", "missing \"values\""))?
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(malformed("values", format!("bad value '{c}'"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let index: HashMap<&Bits, usize> = domain.iter().enumerate().map(|(k, z)| (z, k)).collect();
    let mut certs = BTreeMap::new();
    if let Some(c) = v.get("certs").and_then(Value::as_object) {
        for (y, set) in c {
            let bits: Bits = y.parse()?;
            let k = *index
                .get(&bits)
                .ok_or_else(|| malformed("certs", format!("certificate for {y}, which is not in the domain")))?;
            certs.insert(k, index_set_from_json(set, n, &format!("certificate of {y}"))?);
        }
    }
    BooleanFunction::new(n, domain, values, certs)
}

fn stage_to_json<S: Scalar>(s: &StageReport<S>) -> Result<Value> {
    let side = |list: &[(Bits, S)]| -> Result<Value> {
        let mut m = Map::new();
        for (z, v) in list {
            m.insert(z.to_string(), num(v)?);
        }
        Ok(Value::Object(m))
    };
    let mut o = json!({
        "name": s.name,
        "c0_max": num(&s.c0_max)?,
        "c1_max": num(&s.c1_max)?,
        "c": Number::from_f64(s.c).map(Value::Number).unwrap_or(Value::Null),
        "flow_violations": s.flow_violations,
        "per_input": {"negative": side(&s.negative)?, "positive": side(&s.positive)?},
    });
    if let Some(p) = &s.provenance {
        o["provenance"] = json!(p);
    }
    Ok(o)
}

pub fn report_to_json<S: Scalar>(r: &ComplexityReport<S>) -> Result<Value> {
    Ok(json!({
        "stages": r.stages.iter().map(stage_to_json).collect::<Result<Vec<_>>>()?,
        "total": stage_to_json(&r.total)?,
    }))
}

/// Machine-readable error object.
pub fn error_to_json(e: &Error) -> Value {
    let kind = match e {
        Error::DanglingVertex { .. } => "dangling-vertex",
        Error::NegativeWeight { .. } => "negative-weight",
        Error::IndexOutOfRange { .. } => "index-out-of-range",
        Error::Malformed(_) => "malformed",
        Error::NotInDomain(_) => "not-in-domain",
        Error::WrongSide { .. } => "wrong-side",
        Error::FlowOnZeroWeight { .. } => "flow-on-zero-weight",
        Error::InexactScalar => "inexact-scalar",
        Error::NonUniqueSink => "non-unique-sink",
        Error::OrGuarantee { .. } => "or-guarantee",
        Error::NonUniformFlow(_) => "non-uniform-flow",
        Error::NonMonotone { .. } => "non-monotone",
        Error::CertificateSize { .. } => "certificate-size",
        Error::InconsistentSubfunction(_) => "inconsistent-subfunction",
        Error::DegenerateComplexity => "degenerate-complexity",
        Error::SizeCap { .. } => "size-cap",
        Error::InvalidParameters(_) => "invalid-parameters",
        Error::Json(_) => "json",
    };
    json!({"error": {"kind": kind, "message": e.to_string()}})
}
