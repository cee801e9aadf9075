use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ppr_core::bench::{parse_variant, run_bench, BenchConfig, SolverSpec};
use ppr_core::io::{load_distribution, load_graph, GraphFormat};
use ppr_core::record::{write_csv, SolveOutput};
use ppr_core::verify::{run_suite, Suite, VerifyConfig};
use ppr_core::{build_pagerank_quadratic, solve, AsprVariant, Error, PageRankInstance, SolverConfig, SolverKind, Teleport};

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "ppr", version, about = "Sparse l1-regularized personalized PageRank solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the solution as JSON.
    Solve(SolveArgs),
    /// Run invariant suites on generated instances.
    Verify(VerifyArgs),
    /// Benchmark solvers on a generated graph family and print CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "edgelist")]
    format: GraphFormat,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, conflicts_with = "dist", required_unless_present = "dist")]
    seed_node: Option<usize>,
    /// File of `node weight` lines.
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long)]
    solver: SolverKind,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// ASPR variant: early, constraints or early+constraints.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<AsprVariant>,
    /// Threshold below which a gradient entry counts as negative.
    #[arg(long)]
    tolneg: Option<f64>,
    /// Also write the JSON document to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: String,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    rhos: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "ista,cdpr,aspr")]
    solvers: Vec<SolverSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Write per-instance regime predictors as CSV to this file.
    #[arg(long)]
    regime: Option<PathBuf>,
}

fn input_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INPUT)
}

fn cmd_solve(args: SolveArgs) -> ExitCode {
    let graph = match load_graph(&args.graph, args.format) {
        Ok(g) => g,
        Err(e) => return input_error(e),
    };
    let teleport = match (&args.dist, args.seed_node) {
        (Some(path), _) => match load_distribution(path, graph.node_count()) {
            Ok(pairs) => Teleport::Distribution(pairs),
            Err(e) => return input_error(e),
        },
        (None, Some(v)) => Teleport::Seed(v),
        (None, None) => return input_error("one of --seed-node or --dist is required"),
    };
    let instance = match PageRankInstance::new(graph, args.alpha, args.rho, teleport) {
        Ok(i) => i,
        Err(e) => return input_error(e),
    };
    let q = match build_pagerank_quadratic(&instance) {
        Ok(q) => q,
        Err(e) => return input_error(e),
    };
    if args.variant.is_some() && args.solver != SolverKind::Aspr {
        return input_error("--variant only applies to --solver aspr");
    }
    if args.solver != SolverKind::Cdpr && !(args.eps > 0.0 && args.eps.is_finite()) {
        return input_error(format!("--eps must be a positive number, got {}", args.eps));
    }
    if let Some(t) = args.tolneg {
        if !(t >= 0.0 && t.is_finite()) {
            return input_error(format!("--tolneg must be a nonnegative number, got {t}"));
        }
    }
    let config = SolverConfig {
        tol_neg: args.tolneg,
        ..SolverConfig::default()
    };
    let variant = args.variant.unwrap_or_default();
    let sol = match solve(&q, args.solver, args.eps, variant, &config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("solver failed: {e}");
            return ExitCode::from(EXIT_SOLVER);
        }
    };
    let doc = serde_json::to_string(&SolveOutput::new(args.solver, &sol)).expect("solution serializes");
    if let Some(path) = &args.json {
        if let Err(e) = fs::write(path, format!("{doc}\n")) {
            return input_error(Error::from(e));
        }
    }
    println!("{doc}");
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let config = VerifyConfig {
        suite: args.suite,
        instances: args.instances,
        max_n: args.max_n,
        seed: args.seed,
    };
    match run_suite(&config) {
        Ok(tally) => {
            print!("{tally}");
            if tally.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(e) => input_error(e),
    }
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    let config = BenchConfig {
        family: args.family,
        sizes: args.sizes,
        alphas: args.alphas,
        rhos: args.rhos,
        solvers: args.solvers,
        seed: args.seed,
        repeat: args.repeat,
        eps: args.eps,
    };
    let out = match run_bench(&config) {
        Ok(o) => o,
        Err(Error::Solver(e)) => {
            eprintln!("solver failed: {e}");
            return ExitCode::from(EXIT_SOLVER);
        }
        Err(e) => return input_error(e),
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    if let Err(e) = write_csv(&mut lock, &out.rows) {
        return input_error(e);
    }
    let _ = lock.flush();
    if let Some(path) = &args.regime {
        let file = match fs::File::create(path) {
            Ok(f) => f,
            Err(e) => return input_error(e),
        };
        if let Err(e) = write_csv(file, &out.regimes) {
            return input_error(e);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
