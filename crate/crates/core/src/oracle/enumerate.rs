use nalgebra::{DMatrix, DVector};

use super::{Dense, OracleSolution};
use crate::error::OracleError;
use crate::problem::MQuadratic;

/// Largest dimension handled by exhaustive enumeration.
pub const ENUMERATION_LIMIT: usize = 16;

const NEAR_MISSES: usize = 5;

/// Solution of `Q_SS x_S = b_S`, refined once with the residual.
fn solve_subset(dense: &Dense, members: &[usize]) -> Option<Vec<f64>> {
    let m = members.len();
    let sub = DMatrix::from_fn(m, m, |a, c| dense.q[(members[a], members[c])]);
    let rhs = DVector::from_iterator(m, members.iter().map(|&i| dense.b[i]));
    let chol = sub.clone().cholesky()?;
    let mut x = chol.solve(&rhs);
    let residual = &rhs - &sub * &x;
    x += chol.solve(&residual);
    Some(x.iter().copied().collect())
}

/// Score of a candidate support: `0` iff it satisfies the KKT conditions.
fn violation(dense: &Dense, members: &[usize], xs: &[f64], tol: f64) -> (f64, Vec<f64>) {
    let n = dense.dim();
    let mut x = vec![0.0; n];
    for (&i, &v) in members.iter().zip(xs) {
        x[i] = v;
    }
    let grad = dense.gradient(&x);
    let mut worst = 0.0f64;
    for &v in xs {
        if v <= 0.0 {
            worst = worst.max(-v).max(f64::MIN_POSITIVE);
        }
    }
    for j in 0..n {
        if x[j] == 0.0 && grad[j] < -tol {
            worst = worst.max(-grad[j]);
        }
    }
    (worst, x)
}

fn members_of(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Exact minimizer over `ℝⁿ₊` by trying every support `S ⊆ [n]`: solve
/// `Q_SS x_S = b_S` and accept iff `x_S > 0` and `∇g ≥ 0` off `S`.
pub fn dense_solve_enumerate(q: &MQuadratic) -> Result<OracleSolution, OracleError> {
    let n = q.dim();
    if n > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    let dense = Dense::new(q);
    let scale = dense.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * (1.0 + scale);

    if dense.b.iter().all(|&v| v <= 0.0) {
        return Ok(OracleSolution::from_dense(&dense, vec![0.0; n]));
    }
    for mask in 1u32..(1u32 << n) {
        let members = members_of(mask, n);
        // bᵢ > 0 implies i ∈ supp*.
        if (0..n).any(|i| dense.b[i] > tol && mask & (1 << i) == 0) {
            continue;
        }
        let Some(xs) = solve_subset(&dense, &members) else {
            continue;
        };
        if xs.iter().any(|&v| v <= 0.0) {
            continue;
        }
        let (score, x) = violation(&dense, &members, &xs, tol);
        if score == 0.0 {
            return Ok(OracleSolution::from_dense(&dense, x));
        }
    }

    let mut misses: Vec<(Vec<usize>, f64)> = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let members = members_of(mask, n);
        let xs = if members.is_empty() {
            Vec::new()
        } else {
            match solve_subset(&dense, &members) {
                Some(xs) => xs,
                None => continue,
            }
        };
        let (score, _) = violation(&dense, &members, &xs, tol);
        misses.push((members, score));
    }
    misses.sort_by(|a, b| a.1.total_cmp(&b.1));
    misses.truncate(NEAR_MISSES);
    Err(OracleError::NoAcceptedSupport { near_misses: misses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problem::{build_pagerank_quadratic, PageRankInstance, Teleport};
    use crate::sparse::SymCsr;

    fn two_node(rho: f64) -> MQuadratic {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        build_pagerank_quadratic(&PageRankInstance::new(g, 0.5, rho, Teleport::Seed(0)).unwrap()).unwrap()
    }

    #[test]
    fn two_node_examples() {
        let sol = dense_solve_enumerate(&two_node(0.1)).unwrap();
        assert_eq!(sol.support, vec![0, 1]);
        assert!((sol.x_star[0] - 0.65).abs() < 1e-15 && (sol.x_star[1] - 0.15).abs() < 1e-15);
        assert!((sol.objective + 0.1425).abs() < 1e-15);
        assert!(sol.max_kkt_residual() <= 1e-10);

        let sol = dense_solve_enumerate(&two_node(0.8)).unwrap();
        assert_eq!(sol.support, vec![0]);
        assert!((sol.x_star[0] - 2.0 / 15.0).abs() < 1e-15);
        assert!((sol.gradient[1] - 11.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_rhs_gives_zero() {
        let m = SymCsr::from_dense(&[vec![1.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        let q = MQuadratic::new(m, vec![-1.0, 0.0], 0.5, 1.5).unwrap();
        let sol = dense_solve_enumerate(&q).unwrap();
        assert!(sol.is_zero());
        assert_eq!(sol.x_star, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_large_dimension() {
        let m = SymCsr::from_triplets(17, &(0..17).map(|i| (i, i, 1.0)).collect::<Vec<_>>()).unwrap();
        let q = MQuadratic::new(m, vec![1.0; 17], 1.0, 1.0).unwrap();
        assert!(matches!(dense_solve_enumerate(&q), Err(OracleError::TooLarge { n: 17, max: 16 })));
    }
}
