use crate::error::SolverError;
use crate::problem::MQuadratic;
use crate::solvers::{Counters, SupportState};

fn setup<'a>(
    q: &'a MQuadratic,
    support: Option<&[usize]>,
    x0: &[f64],
) -> Result<(SupportState<'a>, Vec<f64>), SolverError> {
    if x0.len() != q.dim() {
        return Err(SolverError::InvalidParameter(format!(
            "x0 has length {}, expected {}",
            x0.len(),
            q.dim()
        )));
    }
    let all: Vec<usize>;
    let members = match support {
        Some(s) => s,
        None => {
            all = (0..q.dim()).collect();
            &all
        }
    };
    let state = SupportState::with_members(q, members);
    for (i, &v) in x0.iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Err(SolverError::InvalidParameter(format!("x0[{i}] = {v} is infeasible")));
        }
        if v != 0.0 && !state.contains(i) {
            return Err(SolverError::InvalidParameter(format!(
                "x0[{i}] = {v} lies outside the index set"
            )));
        }
    }
    let local = state.restrict(x0);
    Ok((state, local))
}

/// One projected gradient step `x ← max(0, x − ∇_S g(x)/L)` in local coordinates.
pub(crate) fn pgd_step(state: &SupportState, x: &mut [f64], grad: &mut [f64], counters: &mut Counters) {
    let step = 1.0 / state.quadratic().smoothness();
    state.restricted_gradient(x, grad, counters);
    for (xi, gi) in x.iter_mut().zip(grad.iter()) {
        *xi = (*xi - step * gi).max(0.0);
    }
    counters.inner_iters += 1;
}

/// `iters` steps of projected gradient descent over `span{eᵢ : i ∈ S} ∩ ℝⁿ₊`
/// (the full orthant when `support` is `None`).
pub fn pgd(q: &MQuadratic, support: Option<&[usize]>, x0: &[f64], iters: usize) -> Result<Vec<f64>, SolverError> {
    Ok(pgd_iterates(q, support, x0, iters)?.pop().expect("at least x0"))
}

/// All PGD iterates `x⁽⁰⁾, …, x⁽ᵀ⁾` as dense vectors.
pub fn pgd_iterates(
    q: &MQuadratic,
    support: Option<&[usize]>,
    x0: &[f64],
    iters: usize,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let (state, mut x) = setup(q, support, x0)?;
    let mut grad = vec![0.0; x.len()];
    let mut counters = Counters::default();
    let mut out = Vec::with_capacity(iters + 1);
    out.push(x0.to_vec());
    for _ in 0..iters {
        pgd_step(&state, &mut x, &mut grad, &mut counters);
        out.push(state.embed(&x).to_dense());
    }
    Ok(out)
}
