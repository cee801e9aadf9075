use super::{dense_solve, subspace_solve, Dense, OracleSolution};
use crate::error::OracleError;
use crate::problem::MQuadratic;

/// Outcome of the three monotonicity statements for one `(S, x0)` state.
///
/// With `C = span{eᵢ : i ∈ S} ∩ ℝⁿ₊` and `x*_C = argmin_C g`:
/// 1. `x0 ≤ x*_C` and `∇_S g(x*_C) = 0`;
/// 2. `x*_C,i > 0` for `i ∈ S` with `x0ᵢ > 0` or `∇ᵢg(x0) < 0`;
/// 3. if `x*_C > 0` on `S` then `x*_C ≤ x*` and `S ⊆ supp*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub x_c: Vec<f64>,
    /// Largest `x0ᵢ − x*_C,i`.
    pub below_violation: f64,
    /// Largest `|∇ᵢg(x*_C)|` over `S`.
    pub stationarity: f64,
    /// Indices failing statement 2.
    pub positivity_failures: Vec<usize>,
    /// `None` when `x*_C` is not positive on all of `S`.
    pub subset: Option<SubsetCheck>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCheck {
    /// Largest `x*_C,i − x*ᵢ`.
    pub above_violation: f64,
    /// Members of `S` outside `supp*`.
    pub outside_support: Vec<usize>,
}

impl GeometryReport {
    pub fn statement1(&self) -> bool {
        self.below_violation <= self.tol && self.stationarity <= self.tol
    }

    pub fn statement2(&self) -> bool {
        self.positivity_failures.is_empty()
    }

    pub fn statement3(&self) -> bool {
        self.subset
            .as_ref()
            .is_none_or(|s| s.above_violation <= self.tol && s.outside_support.is_empty())
    }

    pub fn passed(&self) -> bool {
        self.statement1() && self.statement2() && self.statement3()
    }
}

/// Checks the monotonicity statements for `(S, x0)`, solving for `x*` first.
pub fn verify_geometry(q: &MQuadratic, set: &[usize], x0: &[f64]) -> Result<GeometryReport, OracleError> {
    let star = dense_solve(q)?;
    verify_geometry_against(q, set, x0, &star)
}

/// Checks `x0 ≥ 0`, `supp(x0) ⊆ S` and `∇_S g(x0) ≤ 1e-9 (1 + ‖b‖∞)`.
pub fn geometry_precondition(q: &MQuadratic, set: &[usize], x0: &[f64]) -> Result<(), OracleError> {
    let n = q.dim();
    if x0.len() != n {
        return Err(OracleError::Precondition(format!("x0 has length {}, expected {n}", x0.len())));
    }
    let mut member = vec![false; n];
    for &i in set {
        if i >= n {
            return Err(OracleError::Precondition(format!("index {i} out of range")));
        }
        member[i] = true;
    }
    let dense = Dense::new(q);
    let scale = 1.0 + q.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pre_tol = 1e-9 * scale;
    let grad0 = dense.gradient(x0);
    for i in 0..n {
        if x0[i] < 0.0 || (!member[i] && x0[i] != 0.0) {
            return Err(OracleError::Precondition(format!("x0[{i}] = {} is not supported on S", x0[i])));
        }
        if member[i] && grad0[i] > pre_tol {
            return Err(OracleError::Precondition(format!(
                "gradient {} at index {i} of S is positive",
                grad0[i]
            )));
        }
    }
    Ok(())
}

/// Same as [`verify_geometry`] with a precomputed `x*`.
///
/// Preconditions: `x0 ≥ 0`, `x0` vanishes off `S` and
/// `∇_S g(x0) ≤ 1e-9 (1 + ‖b‖∞)`. Gradient signs in statement 2 are read
/// with threshold `q.default_tol_neg()`.
pub fn verify_geometry_against(
    q: &MQuadratic,
    set: &[usize],
    x0: &[f64],
    star: &OracleSolution,
) -> Result<GeometryReport, OracleError> {
    geometry_precondition(q, set, x0)?;
    let n = q.dim();
    let mut member = vec![false; n];
    for &i in set {
        member[i] = true;
    }
    let dense = Dense::new(q);
    let scale = 1.0 + q.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let grad0 = dense.gradient(x0);
    let x_c = subspace_solve(q, set)?;
    let grad_c = dense.gradient(&x_c);
    let mut below_violation = 0.0f64;
    let mut stationarity = 0.0f64;
    let mut positivity_failures = Vec::new();
    let neg_tol = q.default_tol_neg();
    for &i in set {
        below_violation = below_violation.max(x0[i] - x_c[i]);
        stationarity = stationarity.max(grad_c[i].abs());
        if (x0[i] > 0.0 || grad0[i] < -neg_tol) && !(x_c[i] > 0.0) {
            positivity_failures.push(i);
        }
    }
    positivity_failures.sort_unstable();
    positivity_failures.dedup();

    let subset = if set.iter().all(|&i| x_c[i] > 0.0) {
        let above_violation = (0..n).map(|i| x_c[i] - star.x_star[i]).fold(0.0f64, f64::max);
        let mut outside_support: Vec<usize> = set.iter().copied().filter(|&i| star.x_star[i] <= 0.0).collect();
        outside_support.sort_unstable();
        outside_support.dedup();
        Some(SubsetCheck {
            above_violation,
            outside_support,
        })
    } else {
        None
    };

    Ok(GeometryReport {
        x_c,
        below_violation,
        stationarity,
        positivity_failures,
        subset,
        tol,
    })
}
