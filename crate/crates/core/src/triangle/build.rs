use serde::{Deserialize, Serialize};

use crate::bits::{k_subsets, pair_index, Bits, IndexSet, PartialAssignment};
use crate::combinators::{johnson_compose, or_compose, JohnsonSpec, OrChild, SetMap};
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::graph::{Edge, LearningGraph};
use crate::load::LoadKind;
use crate::rule::WeightRule;
use crate::scalar::Scalar;

use super::{mask_of, triangle_edges, triangle_function, GraphInstance, MAX_EXPLICIT_N};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Dense,
    Sparse,
    Sparsenew,
}

/// Subset sizes `|X| = x`, `|A| = a`, `|B| = b`. Sparsenew ignores `x`, `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleParams {
    pub variant: Variant,
    pub x: usize,
    pub a: usize,
    pub b: usize,
}

impl TriangleParams {
    pub fn check(&self, n: usize) -> Result<()> {
        if !(3..=MAX_EXPLICIT_N).contains(&n) {
            return Err(Error::SizeCap {
                what: "vertices for a triangle build",
                value: n,
                cap: MAX_EXPLICIT_N,
            });
        }
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        match self.variant {
            Variant::Sparsenew if !(2..=n).contains(&self.b) => bad(format!("need 2 <= b <= n, got b={}", self.b)),
            Variant::Sparsenew => Ok(()),
            _ if !(2 <= self.b && self.b <= self.a && self.a <= n) => {
                bad(format!("need 2 <= b <= a <= n, got a={}, b={}", self.a, self.b))
            }
            _ if !(1..=n).contains(&self.x) => bad(format!("need 1 <= x <= n, got x={}", self.x)),
            _ => Ok(()),
        }
    }
}

pub fn build<S: Scalar>(n: usize, p: &TriangleParams) -> Result<LearningGraph<S>> {
    p.check(n)?;
    match p.variant {
        Variant::Dense => build_blocked(n, p.x, p.a, p.b, LoadKind::Dense),
        Variant::Sparse => build_blocked(n, p.x, p.a, p.b, LoadKind::Sparse),
        Variant::Sparsenew => build_sparsenew_checked(n, p.b),
    }
}

/// `Triangle = ∨_X (f_X ∨ h_X)` with DenseLoad throughout.
pub fn build_dense<S: Scalar>(n: usize, x: usize, a: usize, b: usize) -> Result<LearningGraph<S>> {
    build(
        n,
        &TriangleParams {
            variant: Variant::Dense,
            x,
            a,
            b,
        },
    )
}

/// As [`build_dense`] with SparseLoad in every load stage and `h_X`
/// learning `N_v` before the pairs inside it.
pub fn build_sparse<S: Scalar>(n: usize, x: usize, a: usize, b: usize) -> Result<LearningGraph<S>> {
    build(
        n,
        &TriangleParams {
            variant: Variant::Sparse,
            x,
            a,
            b,
        },
    )
}

/// `Triangle = ∨_w f_w`, each `f_w` a Johnson walk on `b`-subsets
/// connected to `w`.
pub fn build_sparsenew<S: Scalar>(n: usize, b: usize) -> Result<LearningGraph<S>> {
    build(
        n,
        &TriangleParams {
            variant: Variant::Sparsenew,
            x: 0,
            a: 0,
            b,
        },
    )
}

fn decode(n: usize, z: &Bits) -> GraphInstance {
    GraphInstance::from_bits(n, z).expect("domain point encodes a graph")
}

fn trivial<S: Scalar>(f: &BooleanFunction, base: IndexSet) -> (BooleanFunction, LearningGraph<S>) {
    (f.with_values(|_| false, |_| None), LearningGraph::new(f.n(), base))
}

/// OR-search for an edge among `candidates`: one unit edge per pair.
fn pair_search<S: Scalar>(
    f: &BooleanFunction,
    base: &IndexSet,
    n: usize,
    candidates: &[(usize, usize)],
) -> Result<(BooleanFunction, LearningGraph<S>)> {
    let idx: Vec<usize> = candidates.iter().map(|&(u, v)| pair_index(n, u, v)).collect();
    let f_b = f.with_values(|z| idx.iter().any(|&i| z.get(i)), |_| None);
    if f_b.count_positive() == 0 {
        return Ok(trivial(f, base.clone()));
    }
    let mut children = Vec::with_capacity(idx.len());
    for &i in &idx {
        let function = f.with_values(|z| z.get(i), |_| None);
        let mut g = LearningGraph::new(f.n(), base.clone());
        if base.contains(i) {
            for y in function.positives() {
                g.touch_flow(y);
            }
        } else {
            let to = g.add_vertex(base.insert(i));
            let one = WeightRule::constant(S::one());
            let e = g.add_edge(Edge::load(g.root(), to, i, one.clone(), one));
            for y in function.positives() {
                g.add_flow(y, e, S::one());
            }
            g.merge_stage("pair-search", [e], Some("unit edge per candidate pair"));
        }
        children.push(OrChild { function, graph: g });
    }
    let graph = or_compose(&f_b, &children, 1)?.graph;
    Ok((f_b, graph))
}

/// Pair of the lexicographically first triangle avoiding `X` whose
/// endpoints have no common neighbour in `X`.
fn blocked_certificate(g: &GraphInstance, xm: u64) -> Option<(usize, usize)> {
    g.triangles()
        .into_iter()
        .filter(|t| t.iter().all(|&v| xm >> v & 1 == 0))
        .flat_map(|[u, v, w]| [(u, v), (u, w), (v, w)])
        .find(|&(u, v)| g.common(u, v) & xm == 0)
}

fn build_blocked<S: Scalar>(n: usize, x: usize, a: usize, b: usize, kind: LoadKind) -> Result<LearningGraph<S>> {
    let f = triangle_function(n)?;
    let mut children = Vec::new();
    for xs in k_subsets(n, x) {
        let f_x = build_f_x(n, &f, &xs, a, b, kind)?;
        let h_x = match kind {
            LoadKind::Dense => build_h_x_dense(n, &f, &xs)?,
            LoadKind::Sparse => build_h_x_sparse(n, &f, &xs)?,
        };
        let g_x = or_compose(&f, &[f_x, h_x], 1)?.graph;
        children.push(OrChild {
            function: f.clone(),
            graph: g_x,
        });
    }
    let k = children.len();
    Ok(or_compose(&f, &children, k)?.graph)
}

/// `f_X`: a triangle avoiding `X` with an edge in `Δ(X)`, found by a
/// Johnson walk on `a`-subsets `A` labelled with the pairs `X × A`.
fn build_f_x<S: Scalar>(
    n: usize,
    f: &BooleanFunction,
    xs: &[usize],
    a: usize,
    b: usize,
    kind: LoadKind,
) -> Result<OrChild<S>> {
    let xm = mask_of(xs);
    let f_x = f.with_values(|z| blocked_certificate(&decode(n, z), xm).is_some(), |_| None);
    let set_map = SetMap::ProductWith {
        x: xs.to_vec(),
        vertices: n,
        ground: Vec::new(),
    };
    let cert = |y: &Bits| blocked_certificate(&decode(n, y), xm).map(|(u, v)| vec![u, v]);
    let outer_map = set_map.clone();
    let inner = move |av: &[usize], fl: &BooleanFunction| -> Result<(BooleanFunction, LearningGraph<S>)> {
        let label = outer_map.apply(av);
        let free: Vec<usize> = av.iter().copied().filter(|&v| xm >> v & 1 == 0).collect();
        let f_a = fl.with_values(
            |z| {
                let g = decode(n, z);
                free.iter().enumerate().any(|(i, &u)| {
                    free[i + 1..]
                        .iter()
                        .any(|&v| g.has_edge(u, v) && g.common(u, v) != 0 && g.common(u, v) & xm == 0)
                })
            },
            |_| None,
        );
        if f_a.count_positive() == 0 {
            return Ok(trivial(fl, label));
        }
        let mut children = Vec::new();
        for w in (0..n).filter(|&w| xm >> w & 1 == 0) {
            let child = build_f_xaw(n, fl, xm, av, w, b, kind, &label)?;
            if child.function.count_positive() > 0 {
                children.push(child);
            }
        }
        Ok((f_a.clone(), or_compose(&f_a, &children, 1)?.graph))
    };
    let spec = JohnsonSpec {
        ground: n,
        k: a,
        r: 2,
        base: IndexSet::empty(),
        set_map,
        load_kinds: vec![kind; 3],
        certificate: &cert,
        inner: &inner,
    };
    let j = johnson_compose(&spec, &f_x)?;
    Ok(OrChild {
        function: f_x,
        graph: j.graph,
    })
}

/// `f_{X,A,w}` on the inputs sharing one assignment of `S(A)`: Johnson
/// walk over `b`-subsets `B ⊆ A` labelled with `{w} × B`, then an OR-search
/// over `Δ(X,B,w)`.
#[allow(clippy::too_many_arguments)]
fn build_f_xaw<S: Scalar>(
    n: usize,
    fl: &BooleanFunction,
    xm: u64,
    av: &[usize],
    w: usize,
    b: usize,
    kind: LoadKind,
    label: &IndexSet,
) -> Result<OrChild<S>> {
    let good = |g: &GraphInstance, u: usize, v: usize| {
        u != w && v != w && g.has_edge(w, u) && g.has_edge(w, v) && g.common(u, v) & xm == 0
    };
    let cert = |y: &Bits| {
        let g = decode(n, y);
        (0..av.len())
            .flat_map(|i| (i + 1..av.len()).map(move |j| (i, j)))
            .find(|&(i, j)| {
                let (u, v) = (av[i], av[j]);
                xm >> u & 1 == 0 && xm >> v & 1 == 0 && g.has_edge(u, v) && good(&g, u, v)
            })
            .map(|(i, j)| vec![i, j])
    };
    let f_w = fl.with_values(|z| cert(z).is_some(), |_| None);
    let set_map = SetMap::ProductWith {
        x: vec![w],
        vertices: n,
        ground: av.to_vec(),
    };
    let inner_map = set_map.clone();
    let inner = move |bi: &[usize], fb: &BooleanFunction| -> Result<(BooleanFunction, LearningGraph<S>)> {
        let base = label.union(&inner_map.apply(bi));
        let Some(z) = fb.domain().first() else {
            return Ok(trivial(fb, base));
        };
        // Everything below is read from S(B), shared by the whole group.
        let g = decode(n, z);
        let bv: Vec<usize> = bi.iter().map(|&i| av[i]).filter(|&v| xm >> v & 1 == 0).collect();
        let candidates: Vec<(usize, usize)> = bv
            .iter()
            .enumerate()
            .flat_map(|(i, &u)| bv[i + 1..].iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| good(&g, u, v))
            .collect();
        pair_search(fb, &base, n, &candidates)
    };
    let spec = JohnsonSpec {
        ground: av.len(),
        k: b,
        r: 2,
        base: label.clone(),
        set_map,
        load_kinds: vec![kind; 3],
        certificate: &cert,
        inner: &inner,
    };
    let j = johnson_compose(&spec, &f_w)?;
    Ok(OrChild {
        function: f_w,
        graph: j.graph,
    })
}

fn meets(t: [usize; 3], xm: u64) -> bool {
    t.iter().any(|&v| xm >> v & 1 == 1)
}

/// `h_X` as an OR over the vertex triples meeting `X`, each loaded densely.
fn build_h_x_dense<S: Scalar>(n: usize, f: &BooleanFunction, xs: &[usize]) -> Result<OrChild<S>> {
    let xm = mask_of(xs);
    let h_x = f.with_values(|z| decode(n, z).triangles().into_iter().any(|t| meets(t, xm)), |_| None);
    let mut children = Vec::new();
    for t in k_subsets(n, 3) {
        let t = [t[0], t[1], t[2]];
        if !meets(t, xm) {
            continue;
        }
        let edges = triangle_edges(n, t);
        let function = f.with_values(|z| edges.iter().all(|i| z.get(i)), |_| None);
        let mut g = LearningGraph::new(f.n(), IndexSet::empty());
        let (_, e) = g.add_load(g.root(), &edges, LoadKind::Dense);
        for y in function.positives() {
            g.add_flow(y, e, S::one());
        }
        g.merge_stage("triple-load", [e], Some("DenseLoad of the three pairs of a triple"));
        children.push(OrChild { function, graph: g });
    }
    Ok(OrChild {
        graph: or_compose(&h_x, &children, 1)?.graph,
        function: h_x,
    })
}

/// `h_X` as an OR over `v ∈ X`: SparseLoad `{v} × V`, then, gated on the
/// neighbourhood found, DenseLoad of the pairs inside `N_v`.
fn build_h_x_sparse<S: Scalar>(n: usize, f: &BooleanFunction, xs: &[usize]) -> Result<OrChild<S>> {
    let xm = mask_of(xs);
    let h_x = f.with_values(|z| decode(n, z).triangles().into_iter().any(|t| meets(t, xm)), |_| None);
    let mut children = Vec::new();
    for &v in xs {
        let star = IndexSet::new((0..n).filter(|&u| u != v).map(|u| pair_index(n, u, v)));
        let function = f.with_values(
            |z| decode(n, z).triangles().into_iter().any(|t| t.contains(&v)),
            |_| None,
        );
        let mut g = LearningGraph::new(f.n(), IndexSet::empty());
        let (hub, e) = g.add_load(g.root(), &star, LoadKind::Sparse);
        g.merge_stage("neighbourhood-load", [e], Some("SparseLoad of {v} x V"));
        let mut groups: std::collections::BTreeMap<PartialAssignment, Vec<&Bits>> = Default::default();
        for z in function.domain() {
            groups.entry(z.restrict(&star)).or_default().push(z);
        }
        for (mu, zs) in groups {
            let g0 = decode(n, zs[0]);
            let nv: Vec<usize> = (0..n).filter(|&u| g0.has_edge(u, v)).collect();
            let inside = IndexSet::new(
                nv.iter()
                    .enumerate()
                    .flat_map(|(i, &u)| nv[i + 1..].iter().map(move |&w| pair_index(n, u, w))),
            );
            if inside.is_empty() {
                continue;
            }
            let to = g.add_vertex(star.union(&inside));
            let e2 = g.connect_load(hub, to, LoadKind::Dense);
            g.edge_mut(e2).gate = Some(mu);
            g.merge_stage(
                "neighbourhood-pairs",
                [e2],
                Some("DenseLoad of N_v x N_v, gated on N_v"),
            );
            for y in zs.into_iter().filter(|y| function.value(y) == Some(true)) {
                g.add_flow(y, e, S::one());
                g.add_flow(y, e2, S::one());
            }
        }
        children.push(OrChild { function, graph: g });
    }
    Ok(OrChild {
        graph: or_compose(&h_x, &children, 1)?.graph,
        function: h_x,
    })
}

fn build_sparsenew_checked<S: Scalar>(n: usize, b: usize) -> Result<LearningGraph<S>> {
    let f = triangle_function(n)?;
    let mut children = Vec::with_capacity(n);
    for w in 0..n {
        let cert = move |y: &Bits| {
            let g = decode(n, y);
            (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .find(|&(u, v)| u != w && v != w && g.has_edge(u, v) && g.has_edge(w, u) && g.has_edge(w, v))
                .map(|(u, v)| vec![u, v])
        };
        let f_w = f.with_values(|z| cert(z).is_some(), |_| None);
        let set_map = SetMap::ProductWith {
            x: vec![w],
            vertices: n,
            ground: Vec::new(),
        };
        let inner_map = set_map.clone();
        let inner = move |bv: &[usize], fb: &BooleanFunction| -> Result<(BooleanFunction, LearningGraph<S>)> {
            let base = inner_map.apply(bv);
            let Some(z) = fb.domain().first() else {
                return Ok(trivial(fb, base));
            };
            let g = decode(n, z);
            let nb: Vec<usize> = bv.iter().copied().filter(|&u| u != w && g.has_edge(w, u)).collect();
            let candidates: Vec<(usize, usize)> = nb
                .iter()
                .enumerate()
                .flat_map(|(i, &u)| nb[i + 1..].iter().map(move |&v| (u, v)))
                .collect();
            pair_search(fb, &base, n, &candidates)
        };
        let spec = JohnsonSpec {
            ground: n,
            k: b,
            r: 2,
            base: IndexSet::empty(),
            set_map,
            load_kinds: vec![LoadKind::Sparse, LoadKind::Dense, LoadKind::Dense],
            certificate: &cert,
            inner: &inner,
        };
        let j = johnson_compose(&spec, &f_w)?;
        children.push(OrChild {
            function: f_w,
            graph: j.graph,
        });
    }
    Ok(or_compose(&f, &children, 3)?.graph)
}

/// Whether `b ≥ n²/m`, the regime the sparsenew analysis assumes.
pub fn sparsenew_regime(g: &GraphInstance, b: usize) -> bool {
    g.m() > 0 && b * g.m() >= g.n() * g.n()
}
