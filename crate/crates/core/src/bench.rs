//! Benchmark grid over generated PageRank instances.

use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, OracleError};
use crate::oracle::{dense_solve_enumerate, random_graph, GraphFamily, ENUMERATION_LIMIT};
use crate::problem::{build_pagerank_quadratic, MQuadratic, PageRankInstance, Teleport};
use crate::record::{variant_name, BenchRow, InstanceSource, RegimeRow, RunRecord};
use crate::solvers::{cdpr, solve, AsprVariant, SolverConfig, SolverKind};
use crate::verify::stable_gap;

/// A solver plus ASPR variant flags, written `aspr`, `aspr:early`,
/// `aspr:constraints` or `aspr:early+constraints`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub variant: AsprVariant,
}

impl FromStr for SolverSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let kind: SolverKind = head.parse()?;
        let variant = match (kind, tail) {
            (_, None) => AsprVariant::PLAIN,
            (SolverKind::Aspr, Some(t)) => parse_variant(t)?,
            (_, Some(_)) => return Err(format!("solver '{head}' takes no variant")),
        };
        Ok(Self { kind, variant })
    }
}

/// `plain`, `early`, `constraints` or `early+constraints`.
pub fn parse_variant(s: &str) -> Result<AsprVariant, String> {
    let mut v = AsprVariant::PLAIN;
    for part in s.split('+') {
        match part {
            "plain" => {}
            "early" => v.early_termination = true,
            "constraints" => v.updating_constraints = true,
            other => return Err(format!("unknown variant '{other}' (expected early or constraints)")),
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub family: String,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub solvers: Vec<SolverSpec>,
    pub seed: u64,
    pub repeat: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub records: Vec<RunRecord>,
    pub rows: Vec<BenchRow>,
    /// One row per instance.
    pub regimes: Vec<RegimeRow>,
}

struct Instance {
    q: MQuadratic,
    rho: f64,
    reference: Vec<f64>,
    reference_gradient: Vec<f64>,
    support: Vec<usize>,
}

/// Seed node near the middle of the family's layout.
pub fn central_node(family: &GraphFamily) -> usize {
    match *family {
        GraphFamily::Grid { rows, cols } => (rows / 2) * cols + cols / 2,
        GraphFamily::Path(n) => n / 2,
        _ => 0,
    }
}

fn build_instance(family: &GraphFamily, alpha: f64, rho: f64, seed: u64) -> Result<Instance, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph(family, &mut rng)?;
    let inst = PageRankInstance::new(graph, alpha, rho, Teleport::Seed(central_node(family)))?;
    let q = build_pagerank_quadratic(&inst)?;
    let reference = if q.dim() <= ENUMERATION_LIMIT {
        dense_solve_enumerate(&q)?.x_star
    } else {
        cdpr(&q, &SolverConfig::default())?.x.to_dense()
    };
    let reference_gradient = q.gradient(&reference, None, &mut Default::default());
    let support = (0..reference.len()).filter(|&i| reference[i] > 0.0).collect();
    Ok(Instance {
        q,
        rho,
        reference,
        reference_gradient,
        support,
    })
}

fn run_cell(inst: &Instance, family: &str, seed: u64, spec: SolverSpec, eps: f64) -> Result<RunRecord, Error> {
    let start = Instant::now();
    let sol = solve(&inst.q, spec.kind, eps, spec.variant, &SolverConfig::default())?;
    let wall_ns = start.elapsed().as_nanos() as u64;
    let gap = stable_gap(&inst.q, &sol.x.to_dense(), &inst.reference, &inst.reference_gradient);
    Ok(RunRecord {
        source: InstanceSource::Generator {
            family: family.to_string(),
            seed,
        },
        n: inst.q.dim(),
        alpha: inst.q.alpha(),
        rho: Some(inst.rho),
        solver: spec.kind.name().to_string(),
        variant: variant_name(spec.kind, spec.variant).to_string(),
        eps,
        counters: sol.counters,
        support_size: sol.support.len(),
        reference_support_size: Some(inst.support.len()),
        vol_supp: Some(inst.q.volume(&inst.support)),
        ivol_supp: Some(inst.q.internal_volume(&inst.support)),
        gap: Some(gap),
        residuals: sol.report,
        wall_ns,
    })
}

/// Runs every `(size, α, ρ)` instance against every solver `repeat` times.
/// Cells run in parallel; rows come back in grid order.
pub fn run_bench(config: &BenchConfig) -> Result<BenchOutput, Error> {
    if config.repeat == 0 {
        return Err(OracleError::Precondition("--repeat must be at least 1".into()).into());
    }
    if config.sizes.is_empty() || config.alphas.is_empty() || config.rhos.is_empty() || config.solvers.is_empty() {
        return Err(OracleError::Precondition("sizes, alphas, rhos and solvers must be non-empty".into()).into());
    }
    let mut keys = Vec::new();
    for &size in &config.sizes {
        for &alpha in &config.alphas {
            for &rho in &config.rhos {
                keys.push((size, alpha, rho));
            }
        }
    }
    let instances: Vec<(GraphFamily, Instance)> = keys
        .par_iter()
        .map(|&(size, alpha, rho)| -> Result<(GraphFamily, Instance), Error> {
            let family = GraphFamily::with_size(&config.family, size)?;
            let inst = build_instance(&family, alpha, rho, config.seed)?;
            Ok((family, inst))
        })
        .collect::<Result<_, Error>>()?;

    let mut cells = Vec::new();
    for (k, _) in instances.iter().enumerate() {
        for &spec in &config.solvers {
            for _ in 0..config.repeat {
                cells.push((k, spec));
            }
        }
    }
    let records: Vec<RunRecord> = cells
        .par_iter()
        .map(|&(k, spec)| run_cell(&instances[k].1, &config.family, config.seed, spec, config.eps))
        .collect::<Result<_, Error>>()?;
    let rows = records.iter().map(|r| r.bench_row(&config.family)).collect();
    let regimes = instances
        .iter()
        .map(|(family, inst)| RegimeRow::new(family.name(), &inst.q, inst.rho, &inst.support))
        .collect();
    Ok(BenchOutput {
        records,
        rows,
        regimes,
    })
}
