use crate::error::SolverError;
use crate::problem::{GradientWorkspace, MQuadratic};
use crate::solvers::{Counters, GapBound, Solution, SolverConfig};
use crate::sparse::SparseVector;

/// Iterates and support growth of an ISTA run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IstaTrace {
    /// `x⁽ᵗ⁾` for every step, starting at `0`.
    pub iterates: Vec<SparseVector>,
    /// Every coordinate that was ever positive, in order of first appearance.
    pub ever_positive: Vec<usize>,
}

/// Projected gradient descent on the full orthant from `0` with step `1/L`,
/// i.e. ISTA on the ℓ1-regularized objective. Only coordinates with `xᵢ > 0`
/// or a negative gradient are touched; each step costs `vol(supp(x))`.
///
/// Stops once the projected-gradient residual `r` satisfies `‖r‖² ≤ 2αε`,
/// which bounds the gap by `ε`.
pub fn ista_baseline(q: &MQuadratic, eps: f64, config: &SolverConfig) -> Result<Solution, SolverError> {
    run(q, eps, config, None)
}

pub fn ista_traced(q: &MQuadratic, eps: f64, config: &SolverConfig) -> Result<(Solution, IstaTrace), SolverError> {
    let mut trace = IstaTrace::default();
    let sol = run(q, eps, config, Some(&mut trace))?;
    Ok((sol, trace))
}

fn run(
    q: &MQuadratic,
    eps: f64,
    config: &SolverConfig,
    mut trace: Option<&mut IstaTrace>,
) -> Result<Solution, SolverError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SolverError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let tol = config.tol(q);
    let step = 1.0 / q.smoothness();
    let target = 2.0 * q.alpha() * eps;
    let n = q.dim();

    let mut x = vec![0.0; n];
    let mut support: Vec<usize> = Vec::new();
    let mut counters = Counters::default();
    let mut stage_sizes = Vec::new();
    let mut ws = GradientWorkspace::new(n);
    let mut updates: Vec<(usize, f64)> = Vec::new();

    if let Some(t) = trace.as_deref_mut() {
        t.iterates.push(SparseVector::zeros(n));
    }

    loop {
        ws.clear();
        ws.scatter(q, support.iter().map(|&i| (i, x[i])), &mut counters);
        let negatives = ws.negatives(q, tol);

        let mut residual = 0.0;
        updates.clear();
        for &i in &support {
            let gi = ws.value(q, i);
            residual += gi * gi;
            updates.push((i, (x[i] - step * gi).max(0.0)));
        }
        let mut grew = false;
        for &(i, gi) in &negatives {
            if x[i] > 0.0 {
                continue;
            }
            residual += gi * gi;
            updates.push((i, -step * gi));
            grew = true;
        }

        if residual <= target {
            break;
        }
        if counters.inner_iters as usize >= config.max_iters {
            let best = Solution::from_pairs(
                q,
                support.iter().map(|&i| (i, x[i])),
                GapBound::Certified(residual / (2.0 * q.alpha())),
                counters,
                stage_sizes,
            );
            return Err(SolverError::IterationCap {
                cap: config.max_iters,
                best: Box::new(best),
            });
        }

        for &(i, v) in &updates {
            if x[i] == 0.0 && v > 0.0 {
                support.push(i);
                if let Some(t) = trace.as_deref_mut() {
                    t.ever_positive.push(i);
                }
            }
            x[i] = v;
        }
        support.retain(|&i| x[i] > 0.0);
        counters.inner_iters += 1;
        if grew {
            counters.stages += 1;
            stage_sizes.push(support.len());
        }
        if let Some(t) = trace.as_deref_mut() {
            t.iterates
                .push(SparseVector::from_pairs(n, support.iter().map(|&i| (i, x[i]))));
        }
    }

    Ok(Solution::from_pairs(
        q,
        support.iter().map(|&i| (i, x[i])),
        GapBound::Certified(eps),
        counters,
        stage_sizes,
    ))
}
