use proptest::prelude::*;

use learning_graphs::combinators::{or_compose, OrChild};
use learning_graphs::complexity::complexity;
use learning_graphs::costmodel::{eval_cost, optimize_params, reference_choice, CostInput};
use learning_graphs::expand::expand;
use learning_graphs::graph::LearningGraph;
use learning_graphs::json::{canonical, graph_from_json, graph_to_json, rule_from_json, rule_to_json};
use learning_graphs::load::sparse_load;
use learning_graphs::triangle::{delta_sets, GraphInstance, Variant};
use learning_graphs::validate::validate;
use learning_graphs::{Bits, BooleanFunction, IndexSet, LoadKind, PartialAssignment, WeightRule};

fn index_set(n: usize) -> impl Strategy<Value = IndexSet> {
    prop::collection::btree_set(0..n, 0..=n).prop_map(IndexSet::new)
}

fn rule() -> impl Strategy<Value = WeightRule<f64>> {
    let leaf = prop_oneof![
        (0.0f64..1e6).prop_map(WeightRule::Const),
        (0usize..20).prop_map(|size| WeightRule::DenseLoad { size }),
        (index_set(6), 6usize..8, 1usize..10, any::<bool>()).prop_map(|(prefix, index, total, side)| {
            WeightRule::SparseLoad {
                prefix,
                index,
                total,
                side,
            }
        }),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| {
        (inner, prop::collection::vec(any::<bool>(), 1..4), 0.0f64..100.0).prop_map(|(base, bits, value)| {
            let set = IndexSet::new(0..bits.len());
            WeightRule::Override {
                base: Box::new(base),
                at: PartialAssignment::new(set, bits).unwrap(),
                value,
            }
        })
    })
}

fn graph_instance(max_n: usize) -> impl Strategy<Value = GraphInstance> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2)
            .prop_map(move |bits| GraphInstance::from_bits(n, &Bits::from_bools(&bits)).unwrap())
    })
}

/// OR over random load gadgets: `f = ∨ AND(Sᵢ)` on 5 bits.
fn or_of_loads(sets: &[(IndexSet, bool)]) -> (LearningGraph<f64>, BooleanFunction) {
    let n = 5;
    let hit = |z: &Bits, s: &IndexSet| s.iter().all(|i| z.get(i));
    let domain = BooleanFunction::full_domain(n);
    let f = BooleanFunction::from_predicate(
        n,
        domain.clone(),
        |z| sets.iter().any(|s| hit(z, &s.0)),
        |z| sets.iter().find(|s| hit(z, &s.0)).map(|s| s.0.clone()),
    )
    .unwrap();
    let children: Vec<OrChild<f64>> = sets
        .iter()
        .map(|(set, sparse)| {
            let function =
                BooleanFunction::from_predicate(n, domain.clone(), |z| hit(z, set), |_| Some(set.clone())).unwrap();
            let mut graph = LearningGraph::new(n, IndexSet::empty());
            let kind = if *sparse { LoadKind::Sparse } else { LoadKind::Dense };
            let (_, e) = graph.add_load(graph.root(), set, kind);
            for y in function.positives() {
                graph.add_flow(y, e, 1.0);
            }
            OrChild { function, graph }
        })
        .collect();
    (or_compose(&f, &children, 1).unwrap().graph, f)
}

fn load_sets() -> impl Strategy<Value = Vec<(IndexSet, bool)>> {
    prop::collection::vec(
        (
            prop::collection::btree_set(0usize..5, 1..=5).prop_map(IndexSet::new),
            any::<bool>(),
        ),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rule_json_round_trips(r in rule()) {
        let v = rule_to_json(&r).unwrap();
        prop_assert_eq!(rule_from_json::<f64>(&v, 8, "rule").unwrap(), r);
    }

    #[test]
    fn bits_and_keys_round_trip(bits in prop::collection::vec(any::<bool>(), 0..40)) {
        let z = Bits::from_bools(&bits);
        prop_assert_eq!(z.to_string().parse::<Bits>().unwrap(), z.clone());
        let set = IndexSet::new(0..bits.len());
        let p = PartialAssignment::new(set, bits).unwrap();
        prop_assert_eq!(PartialAssignment::parse_key(&p.key()).unwrap(), p);
    }

    #[test]
    fn sparse_load_stays_within_bound(len in 1usize..=20, mask in any::<u64>()) {
        let g = sparse_load::<f64>(&IndexSet::new(0..len));
        let z = Bits::from_mask(len, mask & ((1u64 << len) - 1));
        let ones = z.count_ones() as f64;
        let bound = 6.0 * len as f64 * (ones + 1.0) * ((len + 1) as f64).ln();
        prop_assert!(g.c0(&z).unwrap() <= bound);
        prop_assert!(g.c1(&z).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn expansion_preserves_complexity_and_validity(sets in load_sets()) {
        let (g, f) = or_of_loads(&sets);
        prop_assume!(f.count_positive() > 0);
        let e = expand(&g).unwrap();
        let (a, b) = (complexity(&g, &f, Some(&[])).unwrap(), complexity(&e, &f, Some(&[])).unwrap());
        prop_assert!((a.c() - b.c()).abs() <= 1e-9 * b.c().max(1.0));
        if validate(&g, &f).is_valid() {
            prop_assert!(validate(&e, &f).is_valid());
        }
    }

    #[test]
    fn uniform_scaling_leaves_c_unchanged(sets in load_sets(), s in 0.01f64..100.0) {
        let (g, f) = or_of_loads(&sets);
        prop_assume!(f.count_positive() > 0);
        let mut h = g.clone();
        h.scale_all(&s);
        let (a, b) = (complexity(&g, &f, Some(&[])).unwrap(), complexity(&h, &f, Some(&[])).unwrap());
        prop_assert!((b.c0() - s * a.c0()).abs() <= 1e-9 * b.c0().max(1.0));
        prop_assert!((b.c1() * s - a.c1()).abs() <= 1e-9 * a.c1().max(1.0));
        prop_assert!((a.c() - b.c()).abs() <= 1e-9 * a.c());
    }

    #[test]
    fn graph_json_is_canonical(sets in load_sets()) {
        let (g, _) = or_of_loads(&sets);
        let text = canonical(&graph_to_json(&g).unwrap());
        let back = graph_from_json::<f64>(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(canonical(&graph_to_json(&back).unwrap()), text);
    }

    #[test]
    fn delta_shrinks_as_x_grows(g in graph_instance(8), xm in any::<u8>(), extra in 0usize..8) {
        let n = g.n();
        let x: Vec<usize> = (0..n).filter(|&v| xm >> v & 1 == 1).collect();
        let mut bigger = x.clone();
        bigger.push(extra % n);
        let small = delta_sets(&g, &x, None, None).delta_x;
        prop_assert!(delta_sets(&g, &bigger, None, None).delta_x.is_subset(&small));
    }

    #[test]
    fn graph_bits_round_trip(g in graph_instance(10)) {
        prop_assert_eq!(GraphInstance::from_bits(g.n(), &g.to_bits()).unwrap(), g.clone());
        let cert_ok = g.first_triangle().is_none_or(|[u, v, w]| g.has_edge(u, v) && g.has_edge(u, w) && g.has_edge(v, w));
        prop_assert!(cert_ok);
    }

    #[test]
    fn optimizer_never_worse_than_reference_choice(log_n in 7.0f64..20.0, e in 1.3f64..2.0, which in 0usize..3) {
        let n = log_n.exp2();
        let m = n.powf(e).min(n * n / 2.0);
        let variant = [Variant::Dense, Variant::Sparse, Variant::Sparsenew][which];
        let input = CostInput { n, m, d2: 2.0 * m / n };
        let t = reference_choice(variant, &input);
        let b_min = if variant == Variant::Sparsenew { (n * n / m).min(n) } else { 1.0 };
        // Only feasible reference choices are comparable with the constrained optimum.
        prop_assume!(1.0 <= t.x && t.x <= n && b_min <= t.b && t.b <= t.a && t.a <= n);
        let o = optimize_params(variant, &input).unwrap();
        let reference = eval_cost(variant, &input, &t).unwrap();
        prop_assert!(o.cost <= reference * (1.0 + 1e-9));
    }
}
