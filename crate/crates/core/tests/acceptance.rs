//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use ppr_core::oracle::{dense_solve_enumerate, GraphFamily};
use ppr_core::verify::{check_aspr, check_cdpr, check_geometry, check_oracle, check_rates, Tally, TestInstance};
use ppr_core::{build_pagerank_quadratic, solve, AsprVariant, Graph, PageRankInstance, SolverConfig, SolverKind, Teleport};

const M_MATRIX_INSTANCES: usize = 200;
const PAGERANK_INSTANCES: usize = 50;
const MAX_N: usize = 12;
const RATE_PROBLEMS: usize = 50;
const RATE_MAX_N: usize = 30;
const LEMMA_TUPLES: usize = 100_000;
const HARVEST_MIN: u64 = 1_000;

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

fn from_tally(tally: &Tally, names: &[&str]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    let mut details = Vec::new();
    for name in names {
        match tally.get(name) {
            Some(r) => {
                passed &= r.passed();
                parts.push(format!("{name} {}/{}", r.checks - r.failed, r.checks));
                for f in &r.failures {
                    details.push(format!("{name}: seed {}: {}\n      instance: {}", f.seed, f.detail, f.instance));
                }
            }
            None => {
                passed = false;
                parts.push(format!("{name} never ran"));
            }
        }
    }
    for extra in ["cdpr.run", "aspr.run", "ista.run", "oracle.solve", "instance.generate", "rates.instance"] {
        if let Some(r) = tally.get(extra) {
            if !r.passed() && !names.contains(&extra) {
                passed = false;
                parts.push(format!("{extra} failed {}x", r.failed));
            }
        }
    }
    Outcome {
        passed,
        summary: parts.join(", "),
        details,
    }
}

/// Runs every oracle-anchored suite over the criterion-1 instance set.
fn instance_suite() -> Tally {
    let mut master = ChaCha8Rng::seed_from_u64(0xacce_97ed);
    let mut instances = Vec::new();
    for _ in 0..M_MATRIX_INSTANCES {
        instances.push(TestInstance::m_matrix(master.gen(), MAX_N));
    }
    for _ in 0..PAGERANK_INSTANCES {
        instances.push(TestInstance::pagerank(master.gen(), MAX_N));
    }
    let per_instance = LEMMA_TUPLES.div_ceil(instances.len());
    let mut tally = Tally::default();
    for inst in instances {
        let inst = match inst {
            Ok(i) => i,
            Err(e) => {
                let ctx = ppr_core::verify::Context {
                    seed: 0,
                    dump: "generator".into(),
                };
                tally.record("instance.generate", false, &ctx, || e.to_string());
                continue;
            }
        };
        let star = match dense_solve_enumerate(&inst.q) {
            Ok(s) => s,
            Err(e) => {
                tally.record("oracle.solve", false, &inst.context(), || e.to_string());
                continue;
            }
        };
        check_oracle(&inst, &star, &mut tally);
        check_cdpr(&inst, &star, &mut tally);
        check_aspr(&inst, &star, &mut tally, true);
        check_geometry(&inst, &star, &mut tally, per_instance);
    }
    tally
}

fn rates_suite() -> Tally {
    let mut master = ChaCha8Rng::seed_from_u64(0x5a7e);
    let mut tally = Tally::default();
    for _ in 0..RATE_PROBLEMS {
        check_rates(master.gen(), RATE_MAX_N, &mut tally);
    }
    tally
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Log-log exponent of inner iterations in `κ = L/α` on a 10×10 grid seeded
/// at its center, with `ρ` small enough that the support covers the grid and
/// `eps` proportional to `α` so the relative accuracy is the same at every `α`.
fn scaling() -> Outcome {
    let alphas = [0.5, 0.05, 0.005, 0.0005];
    let family = GraphFamily::Grid { rows: 10, cols: 10 };
    let edges: Vec<(usize, usize)> = (0..100)
        .flat_map(|v| {
            let (r, c) = (v / 10, v % 10);
            let mut out = Vec::new();
            if c + 1 < 10 {
                out.push((v, v + 1));
            }
            if r + 1 < 10 {
                out.push((v, v + 10));
            }
            out
        })
        .collect();
    let graph = Graph::from_edges(family.node_count(), &edges).unwrap();
    let config = SolverConfig::default();
    let runs = [
        ("ista", SolverKind::Ista, AsprVariant::PLAIN),
        ("aspr early", SolverKind::Aspr, AsprVariant::early()),
        ("aspr plain", SolverKind::Aspr, AsprVariant::PLAIN),
    ];
    let mut iters = vec![Vec::new(); runs.len()];
    for &alpha in &alphas {
        let inst = PageRankInstance::new(graph.clone(), alpha, 1e-12, Teleport::Seed(55)).unwrap();
        let q = build_pagerank_quadratic(&inst).unwrap();
        for (k, &(_, kind, variant)) in runs.iter().enumerate() {
            let sol = solve(&q, kind, 1e-6 * alpha, variant, &config).unwrap();
            iters[k].push(sol.counters.inner_iters.max(1) as f64);
        }
    }
    let kappas: Vec<f64> = alphas.iter().map(|a| 1.0 / a).collect();
    let exps: Vec<f64> = iters.iter().map(|ys| slope(&kappas, ys)).collect();
    let ista_ok = (exps[0] - 1.0).abs() <= 0.2;
    let aspr_ok = (exps[1] - 0.5).abs() <= 0.15;
    Outcome {
        passed: ista_ok && aspr_ok,
        summary: format!(
            "exponent in kappa: ista {:.3} (1.0 +- 0.2), aspr early {:.3} (0.5 +- 0.15), aspr plain {:.3} (fixed schedule, not asserted)",
            exps[0], exps[1], exps[2]
        ),
        details: runs
            .iter()
            .zip(&iters)
            .map(|((name, _, _), ys)| format!("{name} inner_iters at alpha {alphas:?}: {ys:?}"))
            .collect(),
    }
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ppr")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("two.txt");
    std::fs::write(&graph, "0 1\n").unwrap();
    let g = graph.to_str().unwrap();
    let base = ["solve", "--graph", g, "--format", "edgelist", "--alpha", "0.5", "--seed-node", "0"];
    let mut problems = Vec::new();
    let mut check = |label: &str, extra: &[&str], expect: &dyn Fn(&Value) -> bool| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let (code, first) = run_cli(&args);
        let (_, second) = run_cli(&args);
        if code != 0 {
            problems.push(format!("{label}: exit {code}"));
        } else if first != second {
            problems.push(format!("{label}: output differs between runs"));
        } else {
            match serde_json::from_str::<Value>(&first) {
                Ok(doc) if expect(&doc) => {}
                _ => problems.push(format!("{label}: unexpected output {first}")),
            }
        }
    };
    let pair = |doc: &Value, k: usize| -> (u64, f64) {
        let p = &doc["x"][k];
        (p[0].as_u64().unwrap_or(u64::MAX), p[1].as_f64().unwrap_or(f64::NAN))
    };
    check("cdpr", &["--rho", "0.1", "--solver", "cdpr"], &|doc| {
        let (a, b) = (pair(doc, 0), pair(doc, 1));
        doc["x"].as_array().is_some_and(|x| x.len() == 2)
            && a.0 == 0
            && b.0 == 1
            && (a.1 - 0.65).abs() <= 1e-15
            && (b.1 - 0.15).abs() <= 1e-15
    });
    check("rho 1", &["--rho", "1.0", "--solver", "cdpr"], &|doc| {
        doc["x"].as_array().is_some_and(|x| x.is_empty()) && doc["support_size"] == 0
    });
    check("aspr", &["--rho", "0.1", "--solver", "aspr", "--eps", "1e-6"], &|doc| {
        doc["gap_bound"].as_f64() == Some(1e-6)
            && doc["x"]
                .as_array()
                .is_some_and(|x| x.iter().all(|p| p[0].as_u64().is_some_and(|i| i <= 1)))
    });
    let (code, report) = run_cli(&["verify", "--suite", "all", "--instances", "100", "--max-n", "12", "--seed", "7"]);
    if code != 0 {
        problems.push(format!("verify exit {code}:\n{report}"));
    }
    Outcome {
        passed: problems.is_empty(),
        summary: if problems.is_empty() {
            "three solve examples byte-stable and as stated; verify --suite all exits 0".into()
        } else {
            format!("{} problem(s)", problems.len())
        },
        details: problems,
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let tally = instance_suite();
    let rates = rates_suite();

    let harvested = tally.get("geometry.statement1").map_or(0, |r| r.checks);
    let mut geometry = from_tally(
        &tally,
        &[
            "geometry.statement1",
            "geometry.statement2",
            "geometry.statement3",
        ],
    );
    if let Some(r) = tally.get("geometry.precondition") {
        geometry.passed = false;
        geometry.summary.push_str(&format!(", {} states failed the precondition", r.failed));
    }
    if harvested < HARVEST_MIN {
        geometry.passed = false;
        geometry.summary.push_str(&format!(", only {harvested} states harvested"));
    }
    let mut lemma = from_tally(&tally, &["lemma.gradient_monotone"]);
    let tuples = tally.get("lemma.gradient_monotone").map_or(0, |r| r.checks);
    if tuples < LEMMA_TUPLES as u64 {
        lemma.passed = false;
        lemma.summary.push_str(&format!(", only {tuples} tuples"));
    }

    let criteria: Vec<(&str, Outcome)> = vec![
        (
            "CDPR exactness and stage count",
            from_tally(&tally, &["cdpr.run", "cdpr.exact_x", "cdpr.exact_objective", "cdpr.stage_count"]),
        ),
        (
            "CDPR structural invariants",
            from_tally(&tally, &["cdpr.q_orthogonal", "cdpr.gradient_annihilation", "cdpr.monotone"]),
        ),
        ("ASPR gap certificate", from_tally(&tally, &["aspr.run", "aspr.gap"])),
        ("ASPR and ISTA sparsity", from_tally(&tally, &["aspr.sparsity", "ista.sparsity"])),
        ("ASPR sandwich", from_tally(&tally, &["aspr.sandwich"])),
        ("PGD and APGD rate bounds", from_tally(&rates, &["rates.pgd", "rates.apgd"])),
        ("gradient monotonicity lemma", lemma),
        ("geometry on harvested states", geometry),
        ("volume bound", from_tally(&tally, &["pagerank.volume_bound"])),
        ("complexity scaling", scaling()),
        ("CLI contract", cli_contract()),
    ];

    let mut all = true;
    for (k, (title, outcome)) in criteria.iter().enumerate() {
        all &= outcome.passed;
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {title}: {}", k + 1, outcome.summary);
        if !outcome.passed {
            for d in &outcome.details {
                println!("    {d}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.iter().filter(|c| c.1.passed).count(),
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
