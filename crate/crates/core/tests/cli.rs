use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ppr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppr")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn two_node(dir: &Path) -> String {
    let path = dir.join("two.txt");
    std::fs::write(&path, "0 1\n").unwrap();
    path.to_str().unwrap().to_string()
}

fn solve(graph: &str, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--graph", graph, "--format", "edgelist", "--alpha", "0.5", "--seed-node", "0"];
    args.extend_from_slice(extra);
    ppr(&args)
}

fn support(doc: &Value) -> Vec<(u64, f64)> {
    doc["x"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_u64().unwrap(), p[1].as_f64().unwrap()))
        .collect()
}

#[test]
fn solve_cdpr_two_node() {
    let dir = tempfile::tempdir().unwrap();
    let g = two_node(dir.path());
    let out = solve(&g, &["--rho", "0.1", "--solver", "cdpr"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["solver"], "cdpr");
    assert_eq!(doc["support_size"], 2);
    assert_eq!(doc["gap_bound"], "exact");
    let x = support(&doc);
    assert_eq!(x.len(), 2);
    assert_eq!((x[0].0, x[1].0), (0, 1));
    assert_eq!(format!("{:.15}", x[0].1), "0.650000000000000");
    assert_eq!(format!("{:.15}", x[1].1), "0.150000000000000");
    for key in ["stages", "inner_iters", "nnz_touched", "full_gradients", "restricted_gradients"] {
        assert!(doc["counters"][key].is_u64(), "{key}");
    }
    assert!(doc["residuals"]["max_violation_positive"].as_f64().unwrap() < 1e-12);

    let again = solve(&g, &["--rho", "0.1", "--solver", "cdpr"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn solve_large_rho_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let g = two_node(dir.path());
    for solver in ["cdpr", "aspr", "ista"] {
        let out = solve(&g, &["--rho", "1.0", "--solver", solver, "--eps", "1e-6"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["x"], Value::Array(vec![]), "{solver}");
        assert_eq!(doc["support_size"], 0);
    }
}

#[test]
fn solve_aspr_certifies_gap() {
    let dir = tempfile::tempdir().unwrap();
    let g = two_node(dir.path());
    let json = dir.path().join("out.json");
    for variant in [None, Some("early"), Some("constraints"), Some("early+constraints")] {
        let mut args = vec!["--rho", "0.1", "--solver", "aspr", "--eps", "1e-6", "--json", json.to_str().unwrap()];
        if let Some(v) = variant {
            args.extend(["--variant", v]);
        }
        let out = solve(&g, &args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let text = stdout(&out);
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["gap_bound"].as_f64(), Some(1e-6));
        let x = support(&doc);
        assert!(x.iter().all(|&(i, v)| i <= 1 && v > 0.0), "{x:?}");
        let objective = 0.5 * (0.75 * x_at(&x, 0).powi(2) - 0.5 * x_at(&x, 0) * x_at(&x, 1) + 0.75 * x_at(&x, 1).powi(2))
            - (0.45 * x_at(&x, 0) - 0.05 * x_at(&x, 1));
        assert!(objective - (-0.1425) <= 1e-6 + 1e-15, "{objective}");
        assert_eq!(std::fs::read_to_string(&json).unwrap(), text);
    }
}

fn x_at(x: &[(u64, f64)], i: u64) -> f64 {
    x.iter().find(|p| p.0 == i).map_or(0.0, |p| p.1)
}

#[test]
fn solve_with_distribution_and_tolneg() {
    let dir = tempfile::tempdir().unwrap();
    let g = two_node(dir.path());
    let dist = dir.path().join("dist.txt");
    std::fs::write(&dist, "0 1.0\n").unwrap();
    let out = ppr(&[
        "solve", "--graph", &g, "--alpha", "0.5", "--rho", "0.1", "--dist", dist.to_str().unwrap(), "--solver", "cdpr",
        "--tolneg", "0",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let via_seed = solve(&g, &["--rho", "0.1", "--solver", "cdpr"]);
    assert_eq!(out.stdout, via_seed.stdout);

    std::fs::write(&dist, "0 0.5\n").unwrap();
    let out = ppr(&["solve", "--graph", &g, "--alpha", "0.5", "--rho", "0.1", "--dist", dist.to_str().unwrap(), "--solver", "cdpr"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_matrix_market_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.mtx");
    std::fs::write(&path, "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n").unwrap();
    let out = ppr(&[
        "solve", "--graph", path.to_str().unwrap(), "--format", "matrixmarket", "--alpha", "0.5", "--rho", "0.1",
        "--seed-node", "0", "--solver", "cdpr",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(support(&serde_json::from_str(&stdout(&out)).unwrap()).len(), 2);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = two_node(dir.path());
    let cases: Vec<Vec<&str>> = vec![
        vec!["--rho", "0.1", "--solver", "pagerank"],
        vec!["--rho", "0.1", "--solver", "cdpr", "--bogus"],
        vec!["--rho", "0.1", "--solver", "aspr", "--variant", "fast"],
        vec!["--rho", "0.1", "--solver", "cdpr", "--variant", "early"],
        vec!["--rho", "-0.1", "--solver", "cdpr"],
        vec!["--rho", "0.1", "--solver", "aspr", "--eps", "0"],
        vec!["--rho", "0.1", "--solver", "ista", "--eps", "-1"],
        vec!["--rho", "0.1", "--solver", "cdpr", "--tolneg", "-1"],
        vec!["--rho", "0.1", "--solver", "cdpr", "--format", "csv"],
    ];
    for extra in cases {
        let out = solve(&g, &extra);
        assert_eq!(code(&out), 2, "{extra:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let out = ppr(&["solve", "--graph", &g, "--alpha", "1.5", "--rho", "0.1", "--seed-node", "0", "--solver", "cdpr"]);
    assert_eq!(code(&out), 2);
    let out = ppr(&["solve", "--graph", &g, "--alpha", "0.5", "--rho", "0.1", "--seed-node", "9", "--solver", "cdpr"]);
    assert_eq!(code(&out), 2);
    let out = ppr(&["solve", "--graph", "/nonexistent/graph.txt", "--alpha", "0.5", "--rho", "0.1", "--seed-node", "0", "--solver", "cdpr"]);
    assert_eq!(code(&out), 2);
    let bad = dir.path().join("loop.txt");
    std::fs::write(&bad, "0 0\n").unwrap();
    let out = ppr(&["solve", "--graph", bad.to_str().unwrap(), "--alpha", "0.5", "--rho", "0.1", "--seed-node", "0", "--solver", "cdpr"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("self-loop at line 1"), "{}", stderr(&out));
    assert_eq!(code(&ppr(&["frobnicate"])), 2);
    assert_eq!(code(&ppr(&[])), 2);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&ppr(&["--help"])), 0);
    assert_eq!(code(&ppr(&["--version"])), 0);
}

#[test]
fn verify_rates_and_bad_range() {
    let out = ppr(&["verify", "--suite", "rates", "--instances", "50", "--max-n", "12", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS rates.pgd (50 checks)"), "{text}");
    assert!(text.contains("PASS rates.apgd (50 checks)"), "{text}");
    assert_eq!(code(&ppr(&["verify", "--max-n", "0"])), 2);
    assert_eq!(code(&ppr(&["verify", "--instances", "0"])), 2);
    assert_eq!(code(&ppr(&["verify", "--suite", "everything"])), 2);
}

#[test]
fn bench_smoke_path_two() {
    let out = ppr(&[
        "bench", "--family", "path", "--sizes", "2", "--alphas", "0.5", "--rhos", "0.1", "--solvers", "cdpr", "--seed", "0",
        "--repeat", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,n,alpha,rho,solver,variant,stages,inner_iters,nnz_touched,full_gradients,support_size,vol_supp,ivol_supp,gap,wall_ns"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 15);
    assert_eq!(&row[..6], &["path", "2", "0.5", "0.1", "cdpr", "-"]);
    assert_eq!(row[10], "2");
    assert!(lines.next().is_none());
}

#[test]
fn bench_rows_regimes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let regime = dir.path().join("regime.csv");
    let args = [
        "bench", "--family", "grid", "--sizes", "64,100", "--alphas", "0.2,0.05", "--rhos", "1e-3", "--solvers",
        "ista,cdpr,aspr,aspr:early", "--seed", "5", "--repeat", "2", "--regime", regime.to_str().unwrap(),
    ];
    let a = ppr(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let rows: Vec<Vec<String>> = stdout(&a)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 2 * 2 * 4 * 2);
    let regimes = std::fs::read_to_string(&regime).unwrap();
    assert_eq!(regimes.lines().count(), 1 + 4);
    assert!(regimes.starts_with("family,n,alpha,rho,kappa,support_size,vol_supp,ivol_supp,cdpr_over_ista"));

    let b = ppr(&args);
    let strip = |o: &Output| -> Vec<String> {
        stdout(o)
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn bench_cdpr_work_tracks_support_not_n() {
    let run = |n: &str| -> (u64, u64) {
        let out = ppr(&[
            "bench", "--family", "grid", "--sizes", n, "--alphas", "0.1", "--rhos", "1e-3", "--solvers", "cdpr", "--seed",
            "0", "--repeat", "1",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let text = stdout(&out);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        (row[8].parse().unwrap(), row[10].parse().unwrap())
    };
    let (small, s1) = run("400");
    let (large, s2) = run("1600");
    assert_eq!(s1, s2);
    assert!(large <= 2 * small, "{small} -> {large}");
}

#[test]
fn bench_input_errors() {
    let base = ["bench", "--sizes", "16", "--alphas", "0.5", "--rhos", "0.1", "--seed", "0", "--repeat", "1"];
    let mut unknown = base.to_vec();
    unknown.extend(["--family", "torus"]);
    assert_eq!(code(&ppr(&unknown)), 2);
    let mut zero = base.to_vec();
    zero.extend(["--family", "grid", "--repeat", "0"]);
    assert_eq!(code(&ppr(&zero)), 2);
    let mut bad_solver = base.to_vec();
    bad_solver.extend(["--family", "grid", "--solvers", "cdpr:early"]);
    assert_eq!(code(&ppr(&bad_solver)), 2);
}
