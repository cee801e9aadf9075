use nalgebra::{DMatrix, DVector};

use super::{Dense, OracleSolution, SUPPORT_THRESHOLD};
use crate::error::OracleError;
use crate::problem::MQuadratic;

/// Largest dimension accepted by the projected oracle.
pub const PROJECTED_LIMIT: usize = 4096;

/// Largest support polished with a dense Cholesky solve.
const POLISH_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedOptions {
    pub max_iters: usize,
    /// Coordinates below `support_threshold · ‖x‖∞` count as zero.
    pub support_threshold: f64,
    /// Re-solve the linear system on the detected support and keep the
    /// result when it satisfies the optimality conditions.
    pub polish: bool,
}

impl Default for ProjectedOptions {
    fn default() -> Self {
        Self {
            max_iters: 2_000_000,
            support_threshold: SUPPORT_THRESHOLD,
            polish: true,
        }
    }
}

fn gradient(q: &MQuadratic, x: &[f64]) -> Vec<f64> {
    let mut g = q.matrix().mul_dense(x);
    for (gi, bi) in g.iter_mut().zip(q.rhs()) {
        *gi -= bi;
    }
    g
}

fn residual_norm2(x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| if xi > 0.0 { gi * gi } else { gi.min(0.0).powi(2) })
        .sum()
}

/// Accelerated projected gradient on the full orthant with adaptive
/// restart, run until the projected-gradient residual certifies
/// `g(x) − g(x*) ≤ gap`. Works on dense iterates.
pub fn dense_solve_projected(q: &MQuadratic, gap: f64, options: &ProjectedOptions) -> Result<OracleSolution, OracleError> {
    let n = q.dim();
    if n > PROJECTED_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            max: PROJECTED_LIMIT,
        });
    }
    if !(gap > 0.0) {
        return Err(OracleError::Precondition(format!("gap must be positive, got {gap}")));
    }
    let (alpha, smoothness) = (q.alpha(), q.smoothness());
    let step = 1.0 / smoothness;
    let root = (smoothness / alpha).sqrt();
    let momentum = (root - 1.0) / (root + 1.0);
    let target = 2.0 * alpha * gap;

    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut iters = 0;
    loop {
        let gx = gradient(q, &x);
        if residual_norm2(&x, &gx) <= target {
            break;
        }
        if iters >= options.max_iters {
            return Err(OracleError::IterationCap(options.max_iters));
        }
        let gy = gradient(q, &y);
        let next: Vec<f64> = y.iter().zip(&gy).map(|(&yi, &gi)| (yi - step * gi).max(0.0)).collect();
        let restart: f64 = gy.iter().zip(next.iter().zip(&x)).map(|(&g, (&a, &b))| g * (a - b)).sum();
        if restart > 0.0 {
            y.clone_from(&x);
        } else {
            for i in 0..n {
                y[i] = next[i] + momentum * (next[i] - x[i]);
            }
            x = next;
        }
        iters += 1;
    }

    let dense_support = |x: &[f64]| {
        let top = x.iter().fold(0.0f64, |m, &v| m.max(v));
        (0..n)
            .filter(|&i| x[i] > options.support_threshold * top)
            .collect::<Vec<_>>()
    };
    let support = dense_support(&x);

    if options.polish && !support.is_empty() && support.len() <= POLISH_LIMIT {
        if let Some(polished) = polish(q, &support) {
            let g = gradient(q, &polished);
            let scale = q.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-12 * (1.0 + scale);
            let feasible = polished.iter().zip(&g).all(|(&xi, &gi)| xi > 0.0 || gi >= -tol);
            if feasible && residual_norm2(&polished, &g) <= residual_norm2(&x, &gradient(q, &x)) {
                return Ok(finish(q, polished, None));
            }
        }
    }
    Ok(finish(q, x, Some(support)))
}

fn polish(q: &MQuadratic, support: &[usize]) -> Option<Vec<f64>> {
    let m = support.len();
    let sub = DMatrix::from_fn(m, m, |a, c| q.matrix().get(support[a], support[c]));
    let rhs = DVector::from_iterator(m, support.iter().map(|&i| q.rhs()[i]));
    let chol = sub.clone().cholesky()?;
    let mut xs = chol.solve(&rhs);
    let residual = &rhs - &sub * &xs;
    xs += chol.solve(&residual);
    if xs.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let mut x = vec![0.0; q.dim()];
    for (&i, &v) in support.iter().zip(xs.iter()) {
        x[i] = v;
    }
    Some(x)
}

fn finish(q: &MQuadratic, x: Vec<f64>, support: Option<Vec<usize>>) -> OracleSolution {
    let mut sol = OracleSolution::from_dense_sparse(q, x);
    if let Some(s) = support {
        sol.support = s;
    }
    sol
}

impl OracleSolution {
    /// Like `from_dense` but evaluates through the sparse matrix so large
    /// instances never materialize `Q`.
    fn from_dense_sparse(q: &MQuadratic, x: Vec<f64>) -> Self {
        if q.dim() <= 64 {
            return Self::from_dense(&Dense::new(q), x);
        }
        let gradient = gradient(q, &x);
        let support = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
        let kkt_residuals = x
            .iter()
            .zip(&gradient)
            .map(|(&xi, &gi)| if xi > 0.0 { gi.abs() } else { (-gi).max(0.0) })
            .collect();
        let objective = x
            .iter()
            .zip(&gradient)
            .zip(q.rhs())
            .map(|((&xi, &gi), &bi)| 0.5 * xi * gi - 0.5 * bi * xi)
            .sum();
        Self {
            x_star: x,
            support,
            objective,
            gradient,
            kkt_residuals,
        }
    }
}
