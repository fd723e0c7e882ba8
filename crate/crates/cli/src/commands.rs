use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Value};

use learning_graphs::adversary::{build_witness, rebalance_to_equal, verify_witness};
use learning_graphs::complexity::complexity;
use learning_graphs::corpus::{generate, CorpusConfig, GENERATOR};
use learning_graphs::costmodel::{fit_exponent, log_range, optimize_params, CostInput, MLaw};
use learning_graphs::expand::expand;
use learning_graphs::json::{
    canonical, function_from_json, function_to_json, graph_from_json, graph_to_json, report_to_json,
};
use learning_graphs::scalar::Rational;
use learning_graphs::triangle::oracle::{oracle_delta, oracle_edge_exp, oracle_ninter, oracle_ninter_sq};
use learning_graphs::triangle::{build, triangle_function, GraphInstance, GraphInstanceJson, TriangleParams, Variant};
use learning_graphs::validate::{validate_with, LinkingMode};
use learning_graphs::{BooleanFunction, Error, LearningGraph, Scalar};

use crate::{BuildArgs, BuildTarget, Command, CorpusArgs, CostArgs, Format, GraphArgs, OracleCommand};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}{error}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Core { path: Option<PathBuf>, error: Error },
}

impl Failure {
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Io { .. } => "io",
            Failure::Core { .. } => "core",
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure::Core { path: None, error }
    }
}

/// Standard output payload and whether every check passed.
pub struct Report {
    pub body: Value,
    pub pass: bool,
    /// Printed verbatim instead of `body` (CSV output).
    pub text: Option<String>,
}

impl Report {
    fn ok(body: Value) -> Self {
        Report {
            body,
            pass: true,
            text: None,
        }
    }

    fn checked(body: Value, pass: bool) -> Self {
        Report { body, pass, text: None }
    }

    fn csv(text: String) -> Self {
        Report {
            body: Value::Null,
            pass: true,
            text: Some(text),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Dense,
    Sparse,
    Sparsenew,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Dense => Variant::Dense,
            VariantArg::Sparse => Variant::Sparse,
            VariantArg::Sparsenew => Variant::Sparsenew,
        }
    }
}

type Outcome = Result<Report, Failure>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate(g) => validate_cmd(&g),
        Command::Complexity { graph, expand } => complexity_cmd(&graph, expand),
        Command::Adversary {
            graph,
            tol,
            cap,
            no_rebalance,
        } => adversary_cmd(&graph, tol, cap, no_rebalance),
        Command::Build(b) => build_cmd(&b),
        Command::Oracle(o) => oracle_cmd(o),
        Command::Costmodel(c) => costmodel_cmd(&c),
        Command::Corpus(c) => corpus_cmd(&c),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|source| Failure::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Failure::Core {
        path: Some(path.into()),
        error: e.into(),
    })
}

fn at<T>(path: &Path, r: learning_graphs::Result<T>) -> Result<T, Failure> {
    r.map_err(|error| Failure::Core {
        path: Some(path.into()),
        error,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|source| Failure::Io {
        path: path.into(),
        source,
    })
}

fn load(args: &GraphArgs) -> Result<(LearningGraph, BooleanFunction), Failure> {
    let g = at(&args.graph, graph_from_json(&read_json(&args.graph)?))?;
    let f = at(&args.function, function_from_json(&read_json(&args.function)?))?;
    Ok((g, f))
}

fn validate_cmd(args: &GraphArgs) -> Outcome {
    let (g, f) = load(args)?;
    let mode = if args.structural {
        LinkingMode::Structural
    } else {
        LinkingMode::Semantic
    };
    let r = validate_with(&g, &f, mode);
    Ok(Report::checked(
        json!({"valid": r.is_valid(), "violations": r.violations}),
        r.is_valid(),
    ))
}

fn complexity_cmd(args: &GraphArgs, expanded: bool) -> Outcome {
    let (mut g, f) = load(args)?;
    if expanded {
        g = expand(&g)?;
    }
    // Stages of alternative OR branches carry partial flow, so stage
    // inflow flags are reported without failing the command.
    let r = complexity(&g, &f, None)?;
    Ok(Report::ok(report_to_json(&r)?))
}

fn adversary_cmd(args: &GraphArgs, tol: f64, cap: usize, no_rebalance: bool) -> Outcome {
    let (g, f) = load(args)?;
    let mut g = expand(&g)?;
    if !no_rebalance {
        g = rebalance_to_equal(&g, &f)?;
    }
    let w = build_witness(&g, &f, cap)?;
    let r = verify_witness(&w, &f, tol);
    Ok(Report::checked(serde_json::to_value(&r).map_err(Error::from)?, r.pass))
}

fn build_cmd(args: &BuildArgs) -> Outcome {
    let f = triangle_function(args.n)?;
    let variant = match args.target {
        BuildTarget::TriangleFunction => {
            let v = function_to_json(&f);
            if let Some(out) = &args.output {
                write_text(out, &canonical(&v))?;
            }
            return Ok(Report::ok(json!({
                "function": "triangle",
                "n": args.n,
                "inputs": f.len(),
                "positives": f.count_positive(),
                "output": args.output.as_ref().map(|p| p.display().to_string()),
            })));
        }
        BuildTarget::TriangleDense => Variant::Dense,
        BuildTarget::TriangleSparse => Variant::Sparse,
        BuildTarget::TriangleSparsenew => Variant::Sparsenew,
    };
    let params = TriangleParams {
        variant,
        x: args.x,
        a: args.a,
        b: args.b,
    };
    let g: LearningGraph = build(args.n, &params)?;
    if let Some(out) = &args.output {
        write_text(out, &canonical(&graph_to_json(&g)?))?;
    }
    let r = complexity(&g, &f, Some(&[]))?;
    Ok(Report::ok(json!({
        "variant": variant,
        "n": args.n,
        "params": {"x": args.x, "a": args.a, "b": args.b},
        "vertices": g.vertex_count(),
        "edges": g.edges().len(),
        "expanded_edges": g.expanded_edge_count(),
        "c0": r.c0(),
        "c1": r.c1(),
        "c": r.c(),
        "output": args.output.as_ref().map(|p| p.display().to_string()),
    })))
}

fn exact(q: &Rational) -> Value {
    json!({"exact": q.to_string(), "value": q.as_f64()})
}

fn rational(num: usize, den: usize) -> Rational {
    Rational::new((num as u64).into(), (den as u64).into())
}

fn instance(path: &Path) -> Result<GraphInstance, Failure> {
    let j: GraphInstanceJson = serde_json::from_value(read_json(path)?).map_err(|e| Failure::Core {
        path: Some(path.into()),
        error: e.into(),
    })?;
    at(path, j.to_instance())
}

fn zero_based(set: &[usize], n: usize) -> Result<Vec<usize>, Failure> {
    set.iter()
        .map(|&i| {
            if i == 0 || i > n {
                Err(Error::IndexOutOfRange { index: i, n }.into())
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn oracle_cmd(cmd: OracleCommand) -> Outcome {
    match cmd {
        OracleCommand::Delta { graph, b, b_set, x } => {
            let g = instance(&graph)?;
            let set = match (b, b_set) {
                (_, Some(s)) => zero_based(&s, g.n())?,
                (Some(b), None) if b <= g.n() => (0..b).collect(),
                (Some(b), None) => return Err(Error::IndexOutOfRange { index: b, n: g.n() }.into()),
                (None, None) => return Err(Failure::Usage("give --b or --b-set".into())),
            };
            if x == 0 {
                return Err(Failure::Usage("--x must be at least 1".into()));
            }
            let e = oracle_delta(&g, &set, x)?;
            let bound = rational(set.len() * set.len(), x);
            let pass = e <= bound;
            Ok(Report::checked(
                json!({"expectation": exact(&e), "bound": exact(&bound), "b": set.len(), "x": x, "within_bound": pass}),
                pass,
            ))
        }
        OracleCommand::Ninter { v1, set, x } => {
            let nset = zero_based(&set, v1)?;
            let e1 = oracle_ninter(v1, &nset, x)?;
            let e2 = oracle_ninter_sq(v1, &nset, x)?;
            let mean = rational(x * nset.len(), v1.max(1));
            let square_bound = &mean * &mean * rational(2, 1);
            let precondition = x * nset.len() >= v1;
            let pass = e1 == mean && (!precondition || e2 <= square_bound);
            Ok(Report::checked(
                json!({
                    "mean": exact(&e1),
                    "mean_formula": exact(&mean),
                    "mean_equal": e1 == mean,
                    "square": exact(&e2),
                    "square_bound": exact(&square_bound),
                    "square_precondition": precondition,
                    "square_within_bound": e2 <= square_bound,
                }),
                pass,
            ))
        }
        OracleCommand::EdgeExp { graph, x, y } => {
            let g = instance(&graph)?;
            let e = oracle_edge_exp(&g, x, y)?;
            let formula = rational(2 * x * y * g.m(), (g.n() * g.n()).max(1));
            Ok(Report::checked(
                json!({"expectation": exact(&e), "formula": exact(&formula), "equal": e == formula}),
                e == formula,
            ))
        }
    }
}

fn costmodel_cmd(args: &CostArgs) -> Outcome {
    let variant: Variant = args.variant.into();
    let law: MLaw = args.m_law.parse()?;
    let ns = match args.n {
        Some(n) => vec![n],
        None => log_range(args.n_min, args.n_max, args.points),
    };
    if args.fit {
        let r = fit_exponent(variant, &law, &ns)?;
        let body = match args.format {
            Format::Json => serde_json::to_value(&r).map_err(Error::from)?,
            Format::Csv => {
                let mut csv = String::from("n,m,d2,cost,x,a,b\n");
                for s in &r.samples {
                    let t = &s.tunables;
                    csv += &format!("{},{},{},{},{},{},{}\n", s.n, s.m, s.d2, s.cost, t.x, t.a, t.b);
                }
                return Ok(Report::csv(csv));
            }
        };
        return Ok(Report::ok(body));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let m = law.m(n);
        let input = CostInput {
            n,
            m,
            d2: args.d2.unwrap_or_else(|| law.regular_d2(n)),
        };
        rows.push(optimize_params(variant, &input)?);
    }
    let body = match args.format {
        Format::Json => json!({"variant": variant, "m_law": args.m_law, "rows": rows}),
        Format::Csv => {
            let mut csv = String::from("n,cost,x,a,b,reference_cost\n");
            for (n, o) in ns.iter().zip(&rows) {
                let t = &o.tunables;
                csv += &format!("{},{},{},{},{},{}\n", n, o.cost, t.x, t.a, t.b, o.reference_cost);
            }
            return Ok(Report::csv(csv));
        }
    };
    Ok(Report::ok(body))
}

fn corpus_cmd(args: &CorpusArgs) -> Outcome {
    let cfg = CorpusConfig {
        seed: args.seed,
        exhaustive_max: args.exhaustive_max,
        random_sizes: args.sizes.clone(),
        probabilities: args.p.clone(),
        samples: args.samples,
    };
    let c = generate(&cfg)?;
    at(&args.out, c.write_dir(&args.out))?;
    Ok(Report::ok(json!({
        "generator": GENERATOR,
        "seed": args.seed,
        "instances": c.entries.len(),
        "dir": args.out.display().to_string(),
    })))
}
