use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OracleError;
use crate::graph::Graph;
use crate::problem::{dense_spectrum, MQuadratic, PageRankInstance, Teleport, DENSE_SPECTRUM_LIMIT};
use crate::sparse::SymCsr;

const SBM_RETRIES: usize = 100;

/// Graph families for generated PageRank instances.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    Path(usize),
    Cycle(usize),
    Grid { rows: usize, cols: usize },
    /// `blocks` communities of `block_size` nodes each.
    Sbm { blocks: usize, block_size: usize, p_in: f64, p_out: f64 },
    /// Hub `0` with `k` leaves.
    Star(usize),
}

impl GraphFamily {
    /// A family member with roughly `n` nodes, by name.
    pub fn with_size(name: &str, n: usize) -> Result<Self, OracleError> {
        let n = n.max(2);
        Ok(match name {
            "path" => GraphFamily::Path(n),
            "cycle" => GraphFamily::Cycle(n.max(3)),
            "star" => GraphFamily::Star(n - 1),
            "grid" => {
                let side = ((n as f64).sqrt().round() as usize).max(2);
                GraphFamily::Grid { rows: side, cols: side }
            }
            "sbm" => {
                let blocks = 4;
                let block_size = n.div_ceil(blocks).max(2);
                let bs = block_size as f64;
                GraphFamily::Sbm {
                    blocks,
                    block_size,
                    p_in: (3.0 * bs.ln().max(1.0) / bs).min(1.0),
                    p_out: 1.0 / (blocks * block_size) as f64,
                }
            }
            other => {
                return Err(OracleError::Generator(format!(
                    "unknown graph family '{other}' (expected path, cycle, grid, sbm or star)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::Path(_) => "path",
            GraphFamily::Cycle(_) => "cycle",
            GraphFamily::Grid { .. } => "grid",
            GraphFamily::Sbm { .. } => "sbm",
            GraphFamily::Star(_) => "star",
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GraphFamily::Path(n) | GraphFamily::Cycle(n) => n,
            GraphFamily::Grid { rows, cols } => rows * cols,
            GraphFamily::Sbm { blocks, block_size, .. } => blocks * block_size,
            GraphFamily::Star(k) => k + 1,
        }
    }
}

/// Ranges for the sampled PageRank parameters; `ρ` is drawn log-uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub alpha: (f64, f64),
    pub rho: (f64, f64),
    /// Fixed seed node; sampled uniformly when `None`.
    pub seed_node: Option<usize>,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            alpha: (0.05, 0.5),
            rho: (1e-3, 0.2),
            seed_node: None,
        }
    }
}

impl InstanceParams {
    pub fn fixed(alpha: f64, rho: f64, seed_node: usize) -> Self {
        Self {
            alpha: (alpha, alpha),
            rho: (rho, rho),
            seed_node: Some(seed_node),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo.ln()..hi.ln()).exp()
    } else {
        lo
    }
}

/// Draws a connected graph of the given family.
pub fn random_graph(family: &GraphFamily, rng: &mut ChaCha8Rng) -> Result<Graph, OracleError> {
    let build = |n: usize, edges: &[(usize, usize)]| Graph::from_edges(n, edges);
    let graph = match *family {
        GraphFamily::Path(n) => build(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>()),
        GraphFamily::Cycle(n) => {
            if n < 3 {
                return Err(OracleError::Generator(format!("cycle needs at least 3 nodes, got {n}")));
            }
            build(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
        }
        GraphFamily::Grid { rows, cols } => {
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            build(rows * cols, &edges)
        }
        GraphFamily::Star(k) => build(k + 1, &(1..=k).map(|i| (0, i)).collect::<Vec<_>>()),
        GraphFamily::Sbm {
            blocks,
            block_size,
            p_in,
            p_out,
        } => {
            let n = blocks * block_size;
            for _ in 0..SBM_RETRIES {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        let p = if u / block_size == v / block_size { p_in } else { p_out };
                        if rng.gen::<f64>() < p {
                            edges.push((u, v));
                        }
                    }
                }
                if let Ok(g) = build(n, &edges) {
                    return Ok(g);
                }
            }
            return Err(OracleError::Generator(format!(
                "no connected SBM draw after {SBM_RETRIES} attempts"
            )));
        }
    };
    graph.map_err(|e| OracleError::Generator(e.to_string()))
}

/// PageRank instance on a generated graph with teleportation `e_v`.
pub fn random_graph_instance(
    family: &GraphFamily,
    params: &InstanceParams,
    seed: u64,
) -> Result<PageRankInstance, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph(family, &mut rng)?;
    let n = graph.node_count();
    let node = match params.seed_node {
        Some(v) => v,
        None => rng.gen_range(0..n),
    };
    let alpha = uniform(&mut rng, params.alpha);
    let rho = log_uniform(&mut rng, params.rho);
    PageRankInstance::new(graph, alpha, rho, Teleport::Seed(node)).map_err(|e| OracleError::Generator(e.to_string()))
}

fn check_args(n: usize, density: f64) -> Result<(), OracleError> {
    if n == 0 {
        return Err(OracleError::Generator("dimension must be at least 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(OracleError::Generator(format!("density must lie in (0,1], got {density}")));
    }
    Ok(())
}

fn random_pattern(n: usize, density: f64, rng: &mut ChaCha8Rng) -> BTreeSet<(usize, usize)> {
    let mut pattern = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < density {
                pattern.insert((i, j));
            }
        }
    }
    pattern
}

fn mixed_rhs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if b.iter().all(|&v| v <= 0.0) {
        let i = rng.gen_range(0..n);
        b[i] = -b[i];
    }
    b
}

/// Strictly diagonally dominant M-matrix with off-diagonals `−U(0,1)` on a
/// random pattern, diagonal `∑|Qᵢⱼ| + U(0.1,1)` and a mixed-sign `b`.
/// `α` and `L` come from the dense spectrum for small `n`, otherwise from
/// Gershgorin discs.
pub fn random_m_matrix(n: usize, density: f64, seed: u64) -> Result<MQuadratic, OracleError> {
    check_args(n, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = random_pattern(n, density, &mut rng);
    let mut abs_sum = vec![0.0; n];
    let mut entries = Vec::with_capacity(n + pattern.len());
    for &(i, j) in &pattern {
        let v = rng.gen_range(0.0..1.0);
        if v == 0.0 {
            continue;
        }
        abs_sum[i] += v;
        abs_sum[j] += v;
        entries.push((i, j, -v));
    }
    let margins: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    for i in 0..n {
        entries.push((i, i, abs_sum[i] + margins[i]));
    }
    let q = SymCsr::from_triplets(n, &entries).map_err(|e| OracleError::Generator(e.to_string()))?;
    let (alpha, smoothness) = if n <= DENSE_SPECTRUM_LIMIT {
        dense_spectrum(&q)
    } else {
        let lo = margins.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = (0..n).map(|i| 2.0 * abs_sum[i] + margins[i]).fold(0.0, f64::max);
        (lo, hi)
    };
    let b = mixed_rhs(n, &mut rng);
    MQuadratic::new(q, b, alpha, smoothness.max(alpha)).map_err(|e| OracleError::Generator(e.to_string()))
}

/// M-matrix with condition number `kappa`: a random weighted Laplacian
/// shifted by `cI` and scaled so that `L = 1` and `α = 1/κ` (for `κ = 1`,
/// `Q = I`). Exact for `n ≤ 64`; above that `κ` is an upper bound.
pub fn random_conditioned_m_matrix(n: usize, density: f64, kappa: f64, seed: u64) -> Result<MQuadratic, OracleError> {
    check_args(n, density)?;
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(OracleError::Generator(format!("kappa must be at least 1, got {kappa}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = random_pattern(n, density, &mut rng);
    let mut degree = vec![0.0; n];
    let mut off = Vec::with_capacity(pattern.len());
    for &(i, j) in &pattern {
        let w = rng.gen_range(0.1..1.0);
        degree[i] += w;
        degree[j] += w;
        off.push((i, j, w));
    }
    let b = mixed_rhs(n, &mut rng);
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(n + off.len());
    for i in 0..n {
        entries.push((i, i, degree[i]));
    }
    entries.extend(off.iter().map(|&(i, j, w)| (i, j, -w)));
    let laplacian = SymCsr::from_triplets(n, &entries).map_err(|e| OracleError::Generator(e.to_string()))?;
    let top = if n <= DENSE_SPECTRUM_LIMIT {
        dense_spectrum(&laplacian).1.max(0.0)
    } else {
        2.0 * degree.iter().copied().fold(0.0, f64::max)
    };

    let (shift, scale) = if kappa == 1.0 || top <= 0.0 {
        (1.0, 1.0)
    } else {
        let shift = top / (kappa - 1.0);
        (shift, 1.0 / (top + shift))
    };
    let keep_edges = !(kappa == 1.0 || top <= 0.0);
    let mut scaled = Vec::with_capacity(entries.len());
    for i in 0..n {
        let d = if keep_edges { degree[i] } else { 0.0 };
        scaled.push((i, i, (d + shift) * scale));
    }
    if keep_edges {
        scaled.extend(off.iter().map(|&(i, j, w)| (i, j, -w * scale)));
    }
    let q = SymCsr::from_triplets(n, &scaled).map_err(|e| OracleError::Generator(e.to_string()))?;
    let alpha = if keep_edges { shift * scale } else { 1.0 };
    MQuadratic::new(q, b, alpha, 1.0).map_err(|e| OracleError::Generator(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_pagerank_quadratic, validate_m_matrix};

    #[test]
    fn path_two_is_worked_example() {
        let inst = random_graph_instance(&GraphFamily::Path(2), &InstanceParams::fixed(0.5, 0.1, 0), 9).unwrap();
        let q = build_pagerank_quadratic(&inst).unwrap();
        assert!((q.rhs()[0] - 0.45).abs() < 1e-15 && (q.rhs()[1] + 0.05).abs() < 1e-15);
        assert_eq!(q.matrix().get(0, 1), -0.25);
        assert_eq!(q.matrix().get(0, 0), 0.75);
    }

    #[test]
    fn grid_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(&GraphFamily::Grid { rows: 4, cols: 4 }, &mut rng).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (16, 24));
    }

    #[test]
    fn sbm_connected_and_reproducible() {
        let fam = GraphFamily::with_size("sbm", 40).unwrap();
        let a = random_graph(&fam, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = random_graph(&fam, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.edges(), b.edges());
        let hopeless = GraphFamily::Sbm {
            blocks: 2,
            block_size: 5,
            p_in: 0.0,
            p_out: 0.0,
        };
        assert!(random_graph(&hopeless, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn m_matrices_validate_and_reproduce() {
        let one = random_m_matrix(1, 0.5, 4).unwrap();
        assert!(one.matrix().get(0, 0) > 0.0);
        for seed in 0..20 {
            let q = random_m_matrix(12, 0.4, seed).unwrap();
            assert!(validate_m_matrix(q.matrix(), q.alpha(), q.smoothness()).is_valid());
            let again = random_m_matrix(12, 0.4, seed).unwrap();
            assert_eq!(q.matrix(), again.matrix());
            assert_eq!(q.rhs(), again.rhs());
        }
        assert!(random_m_matrix(0, 0.5, 0).is_err());
        assert!(random_m_matrix(3, 0.0, 0).is_err());
    }

    #[test]
    fn conditioned_matrices_hit_kappa() {
        for kappa in [1.0, 3.0, 100.0, 1e4] {
            let q = random_conditioned_m_matrix(10, 0.5, kappa, 11).unwrap();
            let (lo, hi) = dense_spectrum(q.matrix());
            assert!((hi - 1.0).abs() < 1e-9, "{kappa}: {hi}");
            assert!((lo - 1.0 / kappa).abs() < 1e-9 * kappa, "{kappa}: {lo}");
            assert!((q.condition_number() - kappa).abs() < 1e-9 * kappa);
        }
    }
}
