//! Invariant suites run on generated instances against the dense oracle.
//!
//! Each check feeds a named invariant in a [`Tally`]; a report passes when
//! every invariant saw zero failures. Failures carry the instance seed and a
//! full dump so they can be replayed with [`TestInstance::sample`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, OracleError};
use crate::oracle::{
    dense_solve, dense_solve_enumerate, dense_solve_projected, random_conditioned_m_matrix, random_graph,
    geometry_precondition, random_m_matrix, subspace_solve, verify_geometry_against, GraphFamily, OracleSolution, ProjectedOptions,
};
use crate::problem::{build_pagerank_quadratic, MQuadratic, PageRankInstance, Teleport};
use crate::solvers::{
    apgd_iterates, aspr_traced, cdpr_traced, ista_traced, pgd_iterates, AsprVariant, Counters, SolverConfig,
};
use crate::sparse::SparseVector;

const KEPT_FAILURES: usize = 3;
const RATE_ITERS: usize = 500;
const LEMMA_TUPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Rates,
    Cdpr,
    Aspr,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "rates" => Ok(Suite::Rates),
            "cdpr" => Ok(Suite::Cdpr),
            "aspr" => Ok(Suite::Aspr),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite '{other}' (expected geometry, rates, cdpr, aspr or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub seed: u64,
    pub instance: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub name: String,
    pub checks: u64,
    pub failed: u64,
    /// The first few failures.
    pub failures: Vec<Failure>,
}

impl InvariantResult {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// Per-invariant pass/fail counts, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub results: Vec<InvariantResult>,
}

/// Identifies the instance a check ran on.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub dump: String,
}

impl Tally {
    fn slot(&mut self, name: &str) -> &mut InvariantResult {
        let idx = match self.results.iter().position(|r| r.name == name) {
            Some(i) => i,
            None => {
                self.results.push(InvariantResult {
                    name: name.to_string(),
                    checks: 0,
                    failed: 0,
                    failures: Vec::new(),
                });
                self.results.len() - 1
            }
        };
        &mut self.results[idx]
    }

    pub fn record(&mut self, name: &str, ok: bool, ctx: &Context, detail: impl FnOnce() -> String) {
        let slot = self.slot(name);
        slot.checks += 1;
        if !ok {
            slot.failed += 1;
            if slot.failures.len() < KEPT_FAILURES {
                slot.failures.push(Failure {
                    seed: ctx.seed,
                    instance: ctx.dump.clone(),
                    detail: detail(),
                });
            }
        }
    }

    pub fn merge(&mut self, other: Tally) {
        for r in other.results {
            let slot = self.slot(&r.name);
            slot.checks += r.checks;
            slot.failed += r.failed;
            for f in r.failures {
                if slot.failures.len() < KEPT_FAILURES {
                    slot.failures.push(f);
                }
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn passed(&self) -> bool {
        self.results.iter().all(InvariantResult::passed)
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            if r.passed() {
                writeln!(f, "PASS {} ({} checks)", r.name, r.checks)?;
            } else {
                writeln!(f, "FAIL {} ({} of {} checks failed)", r.name, r.failed, r.checks)?;
                for fail in &r.failures {
                    writeln!(f, "  seed {}: {}", fail.seed, fail.detail)?;
                    writeln!(f, "  instance: {}", fail.instance)?;
                }
            }
        }
        Ok(())
    }
}

/// Generator recipe of a test instance.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    MMatrix {
        n: usize,
        density: f64,
    },
    PageRank {
        family: GraphFamily,
        alpha: f64,
        rho: f64,
        seed_node: usize,
    },
}

#[derive(Debug, Clone)]
pub struct TestInstance {
    pub seed: u64,
    pub spec: InstanceSpec,
    pub q: MQuadratic,
    pub pagerank: Option<PageRankInstance>,
}

fn sample_family(rng: &mut ChaCha8Rng, n: usize) -> GraphFamily {
    let mut options = vec![GraphFamily::Path(n), GraphFamily::Star(n - 1)];
    if n >= 3 {
        options.push(GraphFamily::Cycle(n));
    }
    if n >= 4 {
        let rows = rng.gen_range(2..=n / 2);
        options.push(GraphFamily::Grid { rows, cols: n / rows });
        options.push(GraphFamily::Sbm {
            blocks: 2,
            block_size: n / 2,
            p_in: 0.7,
            p_out: 0.2,
        });
    }
    let k = rng.gen_range(0..options.len());
    options.swap_remove(k)
}

impl TestInstance {
    /// Random M-matrix instance with `1 ≤ n ≤ max_n`.
    pub fn m_matrix(seed: u64, max_n: usize) -> Result<Self, OracleError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_n.max(1));
        let density = rng.gen_range(0.15..0.8);
        let q = random_m_matrix(n, density, rng.gen())?;
        Ok(Self {
            seed,
            spec: InstanceSpec::MMatrix { n, density },
            q,
            pagerank: None,
        })
    }

    /// Random PageRank instance with `2 ≤ n ≤ max_n`, seeded at a single
    /// node `v` with `ρ < 1/d_v` so that `supp*` is nonempty.
    pub fn pagerank(seed: u64, max_n: usize) -> Result<Self, OracleError> {
        if max_n < 2 {
            return Err(OracleError::Precondition("PageRank instances need at least 2 nodes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=max_n);
        let family = sample_family(&mut rng, n);
        let graph = random_graph(&family, &mut rng)?;
        let seed_node = rng.gen_range(0..graph.node_count());
        let alpha = rng.gen_range(0.05..0.5);
        let rho = rng.gen_range((0.01f64).ln()..0.0).exp() / graph.degree(seed_node) as f64;
        let inst = PageRankInstance::new(graph, alpha, rho, Teleport::Seed(seed_node))
            .map_err(|e| OracleError::Generator(e.to_string()))?;
        let q = build_pagerank_quadratic(&inst).map_err(|e| OracleError::Generator(e.to_string()))?;
        Ok(Self {
            seed,
            spec: InstanceSpec::PageRank {
                family,
                alpha,
                rho,
                seed_node,
            },
            q,
            pagerank: Some(inst),
        })
    }

    /// Alternates between the two kinds by the parity of `index`.
    pub fn sample(seed: u64, index: usize, max_n: usize) -> Result<Self, OracleError> {
        if index % 2 == 1 && max_n >= 2 {
            Self::pagerank(seed, max_n)
        } else {
            Self::m_matrix(seed, max_n)
        }
    }

    pub fn describe(&self) -> String {
        match &self.spec {
            InstanceSpec::MMatrix { n, density } => format!("m-matrix n={n} density={density:?} seed={}", self.seed),
            InstanceSpec::PageRank {
                family,
                alpha,
                rho,
                seed_node,
            } => format!(
                "pagerank {family:?} alpha={alpha:?} rho={rho:?} seed_node={seed_node} seed={}",
                self.seed
            ),
        }
    }

    /// Self-contained dump: recipe, `α`, `L`, `Q` (upper triangle) and `b`.
    pub fn dump(&self) -> String {
        format!(
            "{} | alpha={:?} L={:?} Q={:?} b={:?}",
            self.describe(),
            self.q.alpha(),
            self.q.smoothness(),
            self.q.matrix().upper_triplets(),
            self.q.rhs()
        )
    }

    pub fn context(&self) -> Context {
        Context {
            seed: self.seed,
            dump: self.dump(),
        }
    }
}

fn scale_of(q: &MQuadratic) -> f64 {
    1.0 + q.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `g(x) − g(x*)` as `½eᵀQe + ∇g(x*)ᵀe` with `e = x − x*`, which avoids
/// cancellation near the optimum.
pub fn stable_gap(q: &MQuadratic, x: &[f64], star: &[f64], grad_star: &[f64]) -> f64 {
    let e: Vec<f64> = x.iter().zip(star).map(|(a, b)| a - b).collect();
    let qe = q.matrix().mul_dense(&e);
    let quad: f64 = e.iter().zip(&qe).map(|(a, b)| a * b).sum();
    let lin: f64 = e.iter().zip(grad_star).map(|(a, b)| a * b).sum();
    0.5 * quad + lin
}

fn full_gradient(q: &MQuadratic, x: &[f64]) -> Vec<f64> {
    q.gradient(x, None, &mut Counters::default())
}

fn subset_of(set: &[usize], support: &[usize]) -> Option<usize> {
    set.iter().copied().find(|i| support.binary_search(i).is_err())
}

/// Oracle self-consistency: KKT residuals and, for `n ≤ 12`, agreement of
/// the enumeration and projected oracles.
pub fn check_oracle(inst: &TestInstance, star: &OracleSolution, tally: &mut Tally) {
    let ctx = inst.context();
    let q = &inst.q;
    let tol = 1e-10 * scale_of(q);
    tally.record("oracle.kkt", star.max_kkt_residual() <= tol, &ctx, || {
        format!("KKT residual {:e}", star.max_kkt_residual())
    });
    if q.dim() <= 12 {
        let exact = dense_solve_enumerate(q);
        let proj = dense_solve_projected(q, 1e-22 * scale_of(q).powi(2), &ProjectedOptions::default());
        let (ok, detail) = match (exact, proj) {
            (Ok(e), Ok(p)) => {
                let dx = e.x_star.iter().zip(&p.x_star).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let dg = (e.objective - p.objective).abs();
                let xs = inf_norm(&e.x_star).max(f64::MIN_POSITIVE);
                (
                    dx <= 1e-8 * xs && dg <= 1e-10 * e.objective.abs().max(1e-300),
                    format!("x differs by {dx:e}, objective by {dg:e}"),
                )
            }
            (e, p) => (false, format!("oracle error: {:?} / {:?}", e.err(), p.err())),
        };
        tally.record("oracle.cross_agreement", ok, &ctx, || detail);
    }
    if let Some(pr) = &inst.pagerank {
        let vol = q.volume(&star.support) as f64;
        let bound = 1.0 / pr.rho + star.support.len() as f64;
        tally.record("pagerank.volume_bound", vol <= bound, &ctx, || {
            format!("vol(supp*) = {vol} exceeds 1/rho + |supp*| = {bound}")
        });
    }
}

/// Exactness, stage count and structural invariants of CDPR.
pub fn check_cdpr(inst: &TestInstance, star: &OracleSolution, tally: &mut Tally) {
    let ctx = inst.context();
    let q = &inst.q;
    let (sol, trace) = match cdpr_traced(q, &SolverConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            tally.record("cdpr.run", false, &ctx, || e.to_string());
            return;
        }
    };
    tally.record("cdpr.run", true, &ctx, String::new);

    let x = sol.x.to_dense();
    let dx = x.iter().zip(&star.x_star).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let xs = inf_norm(&star.x_star).max(f64::MIN_POSITIVE);
    tally.record("cdpr.exact_x", dx <= 1e-8 * xs, &ctx, || {
        format!("relative x error {:e}", dx / xs)
    });
    let dg = (q.objective(&x) - star.objective).abs();
    tally.record(
        "cdpr.exact_objective",
        dg <= 1e-10 * star.objective.abs().max(1e-300),
        &ctx,
        || format!("objective error {dg:e} vs g* = {:e}", star.objective),
    );
    tally.record(
        "cdpr.stage_count",
        sol.counters.stages as usize == star.support.len(),
        &ctx,
        || format!("{} stages, |supp*| = {}", sol.counters.stages, star.support.len()),
    );
    let outside = subset_of(&trace.pivots, &star.support);
    tally.record("cdpr.pivots_in_support", outside.is_none(), &ctx, || {
        format!("pivot {outside:?} outside supp* {:?}", star.support)
    });

    let dirs: Vec<Vec<f64>> = trace.basis.directions.iter().map(SparseVector::to_dense).collect();
    let qd: Vec<Vec<f64>> = dirs.iter().map(|d| q.matrix().mul_dense(d)).collect();
    let mut worst = 0.0f64;
    for k in 0..dirs.len() {
        for j in 0..k {
            let dot: f64 = dirs[j].iter().zip(&qd[k]).map(|(a, b)| a * b).sum();
            let norm = (trace.basis.curvatures[j] * trace.basis.curvatures[k]).sqrt();
            worst = worst.max(dot.abs() / norm);
        }
    }
    tally.record("cdpr.q_orthogonal", worst <= 1e-8, &ctx, || {
        format!("normalized Q-inner product {worst:e}")
    });

    let scale = scale_of(q);
    let mut annihilation = 0.0f64;
    let mut decrease = 0.0f64;
    for t in 1..trace.iterates.len() {
        let xt = trace.iterates[t].to_dense();
        let g = full_gradient(q, &xt);
        for &i in &trace.pivots[..t] {
            annihilation = annihilation.max(g[i].abs());
        }
        let prev = trace.iterates[t - 1].to_dense();
        for i in 0..xt.len() {
            decrease = decrease.max(prev[i] - xt[i]);
        }
    }
    tally.record("cdpr.gradient_annihilation", annihilation <= 1e-8 * scale, &ctx, || {
        format!("|grad| on the pivot set reached {annihilation:e}")
    });
    tally.record("cdpr.monotone", decrease <= 1e-10 * (1.0 + xs), &ctx, || {
        format!("coordinate decreased by {decrease:e}")
    });
}

const VARIANTS: [(&str, AsprVariant); 3] = [
    ("plain", AsprVariant::PLAIN),
    (
        "early",
        AsprVariant {
            early_termination: true,
            updating_constraints: false,
            full_grad_period: None,
        },
    ),
    (
        "constraints",
        AsprVariant {
            early_termination: false,
            updating_constraints: true,
            full_grad_period: None,
        },
    ),
];

/// Gap certificate, sparsity and per-stage sandwich for ASPR, plus gap and
/// sparsity of the ISTA baseline.
pub fn check_aspr(inst: &TestInstance, star: &OracleSolution, tally: &mut Tally, sandwich: bool) {
    let ctx = inst.context();
    let q = &inst.q;
    let scale = 1.0 + inf_norm(&star.x_star);
    for eps in [1e-3, 1e-6] {
        for (name, variant) in VARIANTS {
            let (sol, trace) = match aspr_traced(q, eps, variant, &SolverConfig::default()) {
                Ok(r) => r,
                Err(e) => {
                    tally.record("aspr.run", false, &ctx, || format!("{name} eps={eps:e}: {e}"));
                    continue;
                }
            };
            tally.record("aspr.run", true, &ctx, String::new);
            let gap = stable_gap(q, &sol.x.to_dense(), &star.x_star, &star.gradient);
            tally.record("aspr.gap", gap <= eps, &ctx, || {
                format!("{name} eps={eps:e}: gap {gap:e}")
            });
            let mut ever = trace.ever_nonzero.clone();
            ever.sort_unstable();
            let outside = subset_of(&ever, &star.support);
            tally.record("aspr.sparsity", outside.is_none(), &ctx, || {
                format!("{name} eps={eps:e}: coordinate {outside:?} outside supp* {:?}", star.support)
            });
            let lower_ok = trace
                .lower_bounds
                .iter()
                .all(|l| l.iter().all(|(i, v)| v <= star.x_star[i] + 1e-9 * scale));
            if variant.updating_constraints {
                tally.record("aspr.lower_bounds", lower_ok, &ctx, || {
                    format!("{name} eps={eps:e}: a lower bound exceeds x*")
                });
            }
            if !sandwich {
                continue;
            }
            for (t, stage) in trace.stages.iter().enumerate() {
                let x_c = match subspace_solve(q, &stage.known_good) {
                    Ok(x) => x,
                    Err(e) => {
                        tally.record("aspr.sandwich", false, &ctx, || e.to_string());
                        continue;
                    }
                };
                let start = stage.start.to_dense();
                let end = stage.end.to_dense();
                let mut worst = 0.0f64;
                for i in 0..x_c.len() {
                    worst = worst
                        .max(start[i] - x_c[i])
                        .max(end[i] - x_c[i])
                        .max(x_c[i] - star.x_star[i]);
                }
                tally.record("aspr.sandwich", worst <= 1e-9 * scale, &ctx, || {
                    format!("{name} eps={eps:e} stage {t}: ordering violated by {worst:e}")
                });
            }
        }
        match ista_traced(q, eps, &SolverConfig::default()) {
            Ok((sol, trace)) => {
                let gap = stable_gap(q, &sol.x.to_dense(), &star.x_star, &star.gradient);
                tally.record("ista.gap", gap <= eps, &ctx, || format!("eps={eps:e}: gap {gap:e}"));
                let mut ever = trace.ever_positive.clone();
                ever.sort_unstable();
                let outside = subset_of(&ever, &star.support);
                tally.record("ista.sparsity", outside.is_none(), &ctx, || {
                    format!("eps={eps:e}: coordinate {outside:?} outside supp* {:?}", star.support)
                });
            }
            Err(e) => tally.record("ista.run", false, &ctx, || e.to_string()),
        }
    }
}

/// `(S, x0)` states visited by the solvers with `x0 ≥ 0`, `supp(x0) ⊆ S`
/// and `∇_S g(x0) ≤ 0` up to rounding. CDPR and ISTA states satisfy this
/// by construction; ASPR states are inexact and kept only when they pass the check.
pub fn harvest_states(q: &MQuadratic) -> Vec<(Vec<usize>, Vec<f64>)> {
    let mut states = Vec::new();
    let config = SolverConfig::default();
    let tol = q.default_tol_neg();
    if let Ok((_, trace)) = cdpr_traced(q, &config) {
        for (t, it) in trace.iterates.iter().enumerate() {
            let x = it.to_dense();
            let mut set = trace.pivots[..t].to_vec();
            set.sort_unstable();
            if !set.is_empty() {
                states.push((set.clone(), x.clone()));
            }
            let g = full_gradient(q, &x);
            let negatives: Vec<usize> = (0..x.len()).filter(|&i| g[i] < -tol).collect();
            if let Some(&first) = negatives.first() {
                let mut one = set.clone();
                one.push(first);
                one.sort_unstable();
                one.dedup();
                states.push((one, x.clone()));
                let mut all = set.clone();
                all.extend(&negatives);
                all.sort_unstable();
                all.dedup();
                states.push((all, x));
            }
        }
    }
    if let Ok((_, trace)) = ista_traced(q, 1e-8, &config) {
        let its = &trace.iterates;
        for t in 0..its.len().saturating_sub(1) {
            let set = its[t + 1].indices.clone();
            if !set.is_empty() {
                states.push((set, its[t].to_dense()));
            }
        }
    }
    for (_, variant) in VARIANTS {
        if let Ok((_, trace)) = aspr_traced(q, 1e-6, variant, &config) {
            let approximate = trace
                .stages
                .iter()
                .map(|stage| (stage.known_good.clone(), stage.start.to_dense()))
                .chain(trace.certified_states.iter().map(|(set, x)| (set.clone(), x.to_dense())));
            states.extend(approximate.filter(|(set, x)| geometry_precondition(q, set, x).is_ok()));
        }
    }
    states
}

/// The three geometry statements on harvested states, and the gradient
/// monotonicity lemma on `lemma_tuples` random `(x, i, ε)` draws.
pub fn check_geometry(inst: &TestInstance, star: &OracleSolution, tally: &mut Tally, lemma_tuples: usize) {
    let ctx = inst.context();
    let q = &inst.q;
    for (set, x0) in harvest_states(q) {
        match verify_geometry_against(q, &set, &x0, star) {
            Ok(r) => {
                tally.record("geometry.statement1", r.statement1(), &ctx, || {
                    format!(
                        "S={set:?}: x0 above x*_C by {:e}, |grad_S g(x*_C)| = {:e}",
                        r.below_violation, r.stationarity
                    )
                });
                tally.record("geometry.statement2", r.statement2(), &ctx, || {
                    format!("S={set:?}: x*_C not positive at {:?}", r.positivity_failures)
                });
                tally.record("geometry.statement3", r.statement3(), &ctx, || {
                    format!("S={set:?}: {:?}", r.subset)
                });
            }
            Err(e) => tally.record("geometry.precondition", false, &ctx, || format!("S={set:?}: {e}")),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed ^ 0x5eed_1e44a);
    let n = q.dim();
    let mut counters = Counters::default();
    for _ in 0..lemma_tuples {
        let x: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..2.0) } else { 0.0 })
            .collect();
        let i = rng.gen_range(0..n);
        let eps = rng.gen_range(1e-6f64.ln()..2f64.ln()).exp();
        let before = q.gradient(&x, None, &mut counters);
        let mut moved = x.clone();
        moved[i] -= eps;
        let after = q.gradient(&moved, None, &mut counters);
        let bad = (0..n).find(|&j| j != i && after[j] < before[j] - 1e-12);
        tally.record("lemma.gradient_monotone", bad.is_none(), &ctx, || {
            format!("i={i} eps={eps:e} j={bad:?}")
        });
    }
}

/// Per-iteration PGD and APGD rate bounds on one random subspace problem
/// with `κ` log-uniform in `[1, 10⁴]`.
pub fn check_rates(seed: u64, max_n: usize, tally: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n.max(1));
    let density = rng.gen_range(0.2..0.9);
    let kappa = rng.gen_range(0.0..4.0f64 * 10f64.ln()).exp();
    let ctx = Context {
        seed,
        dump: format!("conditioned m-matrix n={n} density={density:?} kappa={kappa:?} seed={seed}"),
    };
    let q = match random_conditioned_m_matrix(n, density, kappa, rng.gen()) {
        Ok(q) => q,
        Err(e) => {
            tally.record("rates.instance", false, &ctx, || e.to_string());
            return;
        }
    };
    let mut set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
    if set.is_empty() {
        set.push(rng.gen_range(0..n));
    }
    let mut x0 = vec![0.0; n];
    for &i in &set {
        if rng.gen_bool(0.7) {
            x0[i] = rng.gen_range(0.0..3.0);
        }
    }
    let x_c = match subspace_solve(&q, &set) {
        Ok(x) => x,
        Err(e) => {
            tally.record("rates.instance", false, &ctx, || e.to_string());
            return;
        }
    };
    let grad_c = full_gradient(&q, &x_c);
    let (alpha, smoothness) = (q.alpha(), q.smoothness());
    let dist0: f64 = x0.iter().zip(&x_c).map(|(a, b)| (a - b).powi(2)).sum();
    let eps2 = f64::EPSILON * f64::EPSILON;
    let xs = inf_norm(&x_c);
    let bs = inf_norm(q.rhs());
    let floor_dist = 100.0 * n as f64 * eps2 * (1.0 + xs * xs + inf_norm(&x0).powi(2));
    let floor_gap = 100.0 * n as f64 * eps2 * (1.0 + smoothness * xs * xs + bs * xs);

    match pgd_iterates(&q, Some(&set), &x0, RATE_ITERS) {
        Ok(iters) => {
            let ratio = 1.0 - alpha / smoothness;
            let mut worst: Option<(usize, f64, f64)> = None;
            for (t, x) in iters.iter().enumerate() {
                let d: f64 = x.iter().zip(&x_c).map(|(a, b)| (a - b).powi(2)).sum();
                let bound = ratio.powi(t as i32) * dist0;
                if d > bound * (1.0 + 1e-9) + floor_dist && worst.is_none() {
                    worst = Some((t, d, bound));
                }
            }
            tally.record("rates.pgd", worst.is_none(), &ctx, || {
                let (t, d, b) = worst.unwrap();
                format!("t={t}: distance² {d:e} > bound {b:e}")
            });
        }
        Err(e) => tally.record("rates.pgd", false, &ctx, || e.to_string()),
    }

    match apgd_iterates(&q, &set, &x0, RATE_ITERS) {
        Ok(iters) => {
            let ratio = 1.0 - 1.0 / (2.0 * (smoothness / alpha).sqrt());
            let mut worst: Option<(usize, f64, f64)> = None;
            for (t, y) in iters.iter().enumerate().skip(1) {
                let gap = stable_gap(&q, y, &x_c, &grad_c);
                let bound = ratio.powi(t as i32 - 1) * (smoothness - alpha) * dist0 / 2.0;
                if gap > bound * (1.0 + 1e-9) + floor_gap && worst.is_none() {
                    worst = Some((t, gap, bound));
                }
            }
            tally.record("rates.apgd", worst.is_none(), &ctx, || {
                let (t, g, b) = worst.unwrap();
                format!("t={t}: gap {g:e} > bound {b:e}")
            });
        }
        Err(e) => tally.record("rates.apgd", false, &ctx, || e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub instances: usize,
    pub max_n: usize,
    pub seed: u64,
}

fn run_instance(config: &VerifyConfig, index: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    if config.suite.includes(Suite::Rates) {
        check_rates(seed, config.max_n, &mut tally);
    }
    if config.suite == Suite::Rates {
        return tally;
    }
    let inst = match TestInstance::sample(seed, index, config.max_n) {
        Ok(i) => i,
        Err(e) => {
            let ctx = Context {
                seed,
                dump: format!("instance #{index}"),
            };
            tally.record("instance.generate", false, &ctx, || e.to_string());
            return tally;
        }
    };
    let star = match dense_solve(&inst.q) {
        Ok(s) => s,
        Err(e) => {
            tally.record("oracle.solve", false, &inst.context(), || e.to_string());
            return tally;
        }
    };
    if config.suite.includes(Suite::Cdpr) {
        check_oracle(&inst, &star, &mut tally);
        check_cdpr(&inst, &star, &mut tally);
    }
    if config.suite.includes(Suite::Aspr) {
        check_aspr(&inst, &star, &mut tally, true);
    }
    if config.suite.includes(Suite::Geometry) {
        check_geometry(&inst, &star, &mut tally, LEMMA_TUPLES);
    }
    tally
}

/// Runs `instances` generated instances through `suite`. Instances are
/// processed in parallel and merged in index order.
pub fn run_suite(config: &VerifyConfig) -> Result<Tally, Error> {
    if config.max_n == 0 {
        return Err(OracleError::Precondition("--max-n must be at least 1".into()).into());
    }
    if config.instances == 0 {
        return Err(OracleError::Precondition("--instances must be at least 1".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.instances).map(|_| rng.gen()).collect();
    let tallies: Vec<Tally> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run_instance(config, i, s))
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total.merge(t);
    }
    Ok(total)
}
