//! `lg`: build, validate and analyse extended learning graphs.
//!
//! Exit codes: 0 success, 1 a check failed (report on stdout),
//! 2 usage or input error (JSON error object on stdout).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use learning_graphs::json::{canonical, error_to_json};

#[derive(Parser)]
#[command(name = "lg", version, about = "Extended learning graphs toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph against a function: structure, linking, flows.
    Validate(GraphArgs),
    /// Per-stage and total complexity report.
    Complexity {
        #[command(flatten)]
        graph: GraphArgs,
        /// Evaluate on the fully expanded graph instead.
        #[arg(long)]
        expand: bool,
    },
    /// Build and verify the adversary witness of a graph.
    Adversary {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Largest domain for which matrices are materialized.
        #[arg(long, default_value_t = learning_graphs::adversary::DEFAULT_CAP)]
        cap: usize,
        /// Skip rebalancing so that C⁰ = C¹ before building.
        #[arg(long)]
        no_rebalance: bool,
    },
    /// Build a triangle learning graph or truth table.
    Build(BuildArgs),
    /// Exact expectations by enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Optimize tunables of the cost brackets and fit exponents.
    Costmodel(CostArgs),
    /// Generate a reproducible corpus of graph instances.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Learning graph JSON.
    graph: PathBuf,
    /// Truth table JSON.
    #[arg(long)]
    function: PathBuf,
    /// Check linking on every assignment of the read indices, not only
    /// on pairs realized by the domain.
    #[arg(long)]
    structural: bool,
}

#[derive(Clone, Copy, ValueEnum)]
#[allow(clippy::enum_variant_names)]
enum BuildTarget {
    TriangleDense,
    TriangleSparse,
    TriangleSparsenew,
    TriangleFunction,
}

#[derive(Args)]
struct BuildArgs {
    target: BuildTarget,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    x: usize,
    #[arg(long, default_value_t = 2)]
    a: usize,
    #[arg(long, default_value_t = 2)]
    b: usize,
    /// Output file; the summary still goes to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exp_{X,w} |Δ(X,B,w)| against the bound b²/x.
    Delta {
        /// GraphInstance JSON (1-based vertices).
        #[arg(long)]
        graph: PathBuf,
        /// Use B = {1..b}.
        #[arg(long, conflicts_with = "b_set", required_unless_present = "b_set")]
        b: Option<usize>,
        /// Explicit B, e.g. 1,3,4.
        #[arg(long, value_delimiter = ',')]
        b_set: Option<Vec<usize>>,
        #[arg(long)]
        x: usize,
    },
    /// Exp_X |N ∩ X| (and its square) over x-subsets of V1.
    Ninter {
        #[arg(long)]
        v1: usize,
        /// N as 1-based indices, e.g. 1,2.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        set: Vec<usize>,
        #[arg(long)]
        x: usize,
    },
    /// Exp_{X,Y} |E(X,Y)| against 2xym/n².
    EdgeExp {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, value_enum)]
    variant: commands::VariantArg,
    /// Edge count as a function of n, e.g. n^1.5 or 0.5*n^2.
    #[arg(long, default_value = "n^1.5")]
    m_law: String,
    /// Fit the exponent of the optimized cost.
    #[arg(long)]
    fit: bool,
    /// Evaluate at a single n.
    #[arg(long, conflicts_with_all = ["n_min", "n_max"])]
    n: Option<f64>,
    #[arg(long, default_value_t = 1024.0)]
    n_min: f64,
    #[arg(long, default_value_t = 16_777_216.0)]
    n_max: f64,
    #[arg(long, default_value_t = 15)]
    points: usize,
    /// Override d₂ (default: the regular-graph value 2m/n).
    #[arg(long)]
    d2: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// Every graph up to this many vertices.
    #[arg(long, default_value_t = 4)]
    exhaustive_max: usize,
    /// Vertex counts for G(n,p) samples.
    #[arg(long, value_delimiter = ',', default_values_t = [5, 6, 7, 8, 9, 10])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5])]
    p: Vec<f64>,
    /// Samples per (n, p).
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

fn configure_threads() -> Result<(), commands::Failure> {
    let Ok(v) = std::env::var("LG_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .map_err(|_| commands::Failure::Usage(format!("LG_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| commands::Failure::Usage(format!("cannot configure {threads} threads: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e.render().to_string();
            print!(
                "{}",
                canonical(&json!({"error": {"kind": "usage", "message": msg, "detail": detail.trim_end()}}))
            );
            return ExitCode::from(2);
        }
    };
    let outcome = configure_threads().and_then(|()| commands::run(cli.command));
    match outcome {
        Ok(report) => {
            match &report.text {
                Some(t) => print!("{t}"),
                None => print!("{}", canonical(&report.body)),
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let v = match &f {
                commands::Failure::Core { path, error } => {
                    let mut v = error_to_json(error);
                    if let Some(p) = path {
                        v["error"]["path"] = json!(p.display().to_string());
                    }
                    v
                }
                other => json!({"error": {"kind": other.kind(), "message": other.to_string()}}),
            };
            print!("{}", canonical(&v));
            ExitCode::from(2)
        }
    }
}
