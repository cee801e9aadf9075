//! Reference solvers and instance generators used to check the sparse
//! solvers. Everything here works on dense copies of the data and shares no
//! code path with `solvers`.

mod enumerate;
mod generate;
mod geometry;
mod projected;

use nalgebra::DMatrix;

use crate::error::OracleError;
use crate::problem::MQuadratic;

pub use enumerate::{dense_solve_enumerate, ENUMERATION_LIMIT};
pub use generate::{
    random_conditioned_m_matrix, random_graph, random_graph_instance, random_m_matrix, GraphFamily, InstanceParams,
};
pub use geometry::{geometry_precondition, verify_geometry, verify_geometry_against, GeometryReport};
pub use projected::{dense_solve_projected, ProjectedOptions, PROJECTED_LIMIT};

/// Default relative threshold for reading a support off a dense iterate.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Minimizer of `g` over the nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x_star: Vec<f64>,
    /// Sorted indices with `x*ᵢ > 0`.
    pub support: Vec<usize>,
    pub objective: f64,
    pub gradient: Vec<f64>,
    /// `|∇ᵢg|` on the support, `max(0, −∇ᵢg)` off it.
    pub kkt_residuals: Vec<f64>,
}

impl OracleSolution {
    pub(crate) fn from_dense(dense: &Dense, x: Vec<f64>) -> Self {
        let gradient = dense.gradient(&x);
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
        let kkt_residuals = x
            .iter()
            .zip(&gradient)
            .map(|(&xi, &gi)| if xi > 0.0 { gi.abs() } else { (-gi).max(0.0) })
            .collect();
        Self {
            objective: dense.objective(&x),
            x_star: x,
            support,
            gradient,
            kkt_residuals,
        }
    }

    pub fn max_kkt_residual(&self) -> f64 {
        self.kkt_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }
}

/// Dense copy of a quadratic.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    pub q: DMatrix<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    pub(crate) fn new(q: &MQuadratic) -> Self {
        let n = q.dim();
        let m = q.matrix();
        Self {
            q: DMatrix::from_fn(n, n, |i, j| m.get(i, j)),
            b: q.rhs().to_vec(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.b.len()
    }

    pub(crate) fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = -self.b[i];
                for j in 0..n {
                    acc += self.q[(i, j)] * x[j];
                }
                acc
            })
            .collect()
    }

    pub(crate) fn objective(&self, x: &[f64]) -> f64 {
        let g = self.gradient(x);
        // g(x) = ½⟨x, Qx − b⟩ − ½⟨b, x⟩
        x.iter()
            .zip(&g)
            .zip(&self.b)
            .map(|((&xi, &gi), &bi)| 0.5 * xi * gi - 0.5 * bi * xi)
            .sum()
    }
}

/// Exact solution by enumeration for small `n`, otherwise the projected
/// oracle at gap `1e-14 · max(1, ‖b‖∞²/α)`.
pub fn dense_solve(q: &MQuadratic) -> Result<OracleSolution, OracleError> {
    if q.dim() <= ENUMERATION_LIMIT {
        dense_solve_enumerate(q)
    } else {
        let scale = q.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gap = 1e-14 * (scale * scale / q.alpha()).max(1.0);
        dense_solve_projected(q, gap, &ProjectedOptions::default())
    }
}

/// Minimizer of `g` over `span{eᵢ : i ∈ S} ∩ ℝⁿ₊`, as a dense vector.
pub fn subspace_solve(q: &MQuadratic, set: &[usize]) -> Result<Vec<f64>, OracleError> {
    let n = q.dim();
    if set.len() > PROJECTED_LIMIT {
        return Err(OracleError::TooLarge {
            n: set.len(),
            max: PROJECTED_LIMIT,
        });
    }
    let mut members = set.to_vec();
    members.sort_unstable();
    members.dedup();
    if let Some(&bad) = members.iter().find(|&&i| i >= n) {
        return Err(OracleError::Precondition(format!("index {bad} out of range for dimension {n}")));
    }
    let mut out = vec![0.0; n];
    if members.is_empty() {
        return Ok(out);
    }
    let sub = principal_subproblem(q, &members)?;
    let local = dense_solve(&sub)?;
    for (k, &i) in members.iter().enumerate() {
        out[i] = local.x_star[k];
    }
    Ok(out)
}

/// `(Q_SS, b_S)` with the same `α` and `L`, which remain valid bounds for
/// any principal submatrix.
pub(crate) fn principal_subproblem(q: &MQuadratic, members: &[usize]) -> Result<MQuadratic, OracleError> {
    let n = q.dim();
    let mut local = vec![usize::MAX; n];
    for (k, &i) in members.iter().enumerate() {
        local[i] = k;
    }
    let mut entries = Vec::new();
    for (k, &i) in members.iter().enumerate() {
        let (cols, vals) = q.matrix().row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let l = local[j];
            if l != usize::MAX && l >= k {
                entries.push((k, l, v));
            }
        }
    }
    let m = crate::sparse::SymCsr::from_triplets(members.len(), &entries)
        .map_err(|e| OracleError::Precondition(e.to_string()))?;
    let b = members.iter().map(|&i| q.rhs()[i]).collect();
    MQuadratic::new(m, b, q.alpha(), q.smoothness()).map_err(|e| OracleError::Precondition(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problem::{build_pagerank_quadratic, PageRankInstance, Teleport};

    fn two_node(rho: f64) -> MQuadratic {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        build_pagerank_quadratic(&PageRankInstance::new(g, 0.5, rho, Teleport::Seed(0)).unwrap()).unwrap()
    }

    #[test]
    fn subspace_examples() {
        let q = two_node(0.1);
        let x = subspace_solve(&q, &[0]).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-15);
        assert_eq!(x[1], 0.0);
        assert_eq!(subspace_solve(&q, &[]).unwrap(), vec![0.0, 0.0]);
        let full = subspace_solve(&q, &[0, 1]).unwrap();
        assert_eq!(full, dense_solve(&q).unwrap().x_star);
        assert!(subspace_solve(&q, &[2]).is_err());
    }

    #[test]
    fn dense_objective_matches_sparse() {
        let q = two_node(0.1);
        let d = Dense::new(&q);
        for x in [[0.65, 0.15], [1.0, 0.0], [0.3, 2.0]] {
            assert!((d.objective(&x) - q.objective(&x)).abs() < 1e-15);
        }
    }
}
