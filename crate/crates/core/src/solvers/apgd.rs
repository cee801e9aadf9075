//! Accelerated projected gradient descent for `α`-strongly convex,
//! `L`-smooth quadratics over a box `{x ∈ span{eᵢ : i ∈ S} : x ≥ ℓ}`.
//!
//! With `A₀ = 0`, `a₀ = 1` and `κ = L/α`, each step is
//!
//! ```text
//! A_{t+1} = A_t + a_t
//! x_{t+1} = (A_t y_t + a_t z_t) / A_{t+1}
//! z_{t+1} = proj( ((κ−1+A_t) z_t + a_t (x_{t+1} − ∇g(x_{t+1})/α)) / (κ−1+A_{t+1}) )
//! y_{t+1} = (A_t y_t + a_t z_{t+1}) / A_{t+1}
//! a_{t+1} = A_{t+1} (2κ / (2κ + 1 − √(1+4κ)) − 1)
//! ```

use crate::error::SolverError;
use crate::problem::MQuadratic;
use crate::solvers::{Counters, SupportState};

/// Above this, `κ − 1` is negligible next to `A_t` and the sequence is rescaled.
const RESCALE_AT: f64 = 1e250;

/// Mixing weights for one APGD step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApgdWeights {
    /// `A_t / A_{t+1}`
    pub keep_y: f64,
    /// `a_t / A_{t+1}`
    pub take_z: f64,
    /// `(κ−1+A_t) / (κ−1+A_{t+1})`
    pub keep_z: f64,
    /// `a_t / (κ−1+A_{t+1})`
    pub take_step: f64,
}

/// The `A_t`, `a_t` recurrence.
#[derive(Debug, Clone)]
pub struct ApgdCoefficients {
    shift: f64,
    growth: f64,
    big_a: f64,
    small_a: f64,
    rescaled: bool,
}

impl ApgdCoefficients {
    pub fn new(kappa: f64) -> Result<Self, SolverError> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(SolverError::InvalidParameter(format!(
                "condition number must be at least 1, got {kappa}"
            )));
        }
        Ok(Self {
            shift: kappa - 1.0,
            growth: Self::growth_factor(kappa),
            big_a: 0.0,
            small_a: 1.0,
            rescaled: false,
        })
    }

    /// `A_{t+1}/A_t` for `t ≥ 1`: `2κ / (2κ + 1 − √(1+4κ))`.
    pub fn growth_factor(kappa: f64) -> f64 {
        2.0 * kappa / (2.0 * kappa + 1.0 - (1.0 + 4.0 * kappa).sqrt())
    }

    /// Current `A_t` (meaningless once rescaled).
    pub fn big_a(&self) -> f64 {
        self.big_a
    }

    pub fn small_a(&self) -> f64 {
        self.small_a
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// Weights for the step `t → t+1`, then advances to `t+1`.
    pub fn advance(&mut self) -> ApgdWeights {
        let prev = self.big_a;
        let next = prev + self.small_a;
        let shift = if self.rescaled { 0.0 } else { self.shift };
        let weights = ApgdWeights {
            keep_y: prev / next,
            take_z: self.small_a / next,
            keep_z: (shift + prev) / (shift + next),
            take_step: self.small_a / (shift + next),
        };
        self.big_a = next;
        self.small_a = next * (self.growth - 1.0);
        if self.big_a > RESCALE_AT {
            self.small_a /= self.big_a;
            self.big_a = 1.0;
            self.rescaled = true;
        }
        weights
    }
}

/// APGD iteration state in local coordinates of a [`SupportState`].
#[derive(Debug, Clone)]
pub(crate) struct ApgdRun {
    coeffs: ApgdCoefficients,
    inv_alpha: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `∇_S g(x)` at the latest interpolation point `x`.
    pub grad: Vec<f64>,
}

impl ApgdRun {
    pub(crate) fn new(q: &MQuadratic, start: &[f64]) -> Result<Self, SolverError> {
        Ok(Self {
            coeffs: ApgdCoefficients::new(q.condition_number())?,
            inv_alpha: 1.0 / q.alpha(),
            x: start.to_vec(),
            y: start.to_vec(),
            z: start.to_vec(),
            grad: vec![0.0; start.len()],
        })
    }

    /// One step; `z` is clamped below by `lower`.
    pub(crate) fn step(&mut self, state: &SupportState, lower: &[f64], counters: &mut Counters) {
        let w = self.coeffs.advance();
        for k in 0..self.x.len() {
            self.x[k] = w.keep_y * self.y[k] + w.take_z * self.z[k];
        }
        state.restricted_gradient(&self.x, &mut self.grad, counters);
        for k in 0..self.x.len() {
            let target = self.x[k] - self.inv_alpha * self.grad[k];
            self.z[k] = (w.keep_z * self.z[k] + w.take_step * target).max(lower[k]);
            self.y[k] = w.keep_y * self.y[k] + w.take_z * self.z[k];
        }
        counters.inner_iters += 1;
    }
}

fn setup<'a>(q: &'a MQuadratic, support: &[usize], x0: &[f64]) -> Result<(SupportState<'a>, Vec<f64>), SolverError> {
    if x0.len() != q.dim() {
        return Err(SolverError::InvalidParameter(format!(
            "x0 has length {}, expected {}",
            x0.len(),
            q.dim()
        )));
    }
    let state = SupportState::with_members(q, support);
    for (i, &v) in x0.iter().enumerate() {
        if v < 0.0 || !v.is_finite() || (v != 0.0 && !state.contains(i)) {
            return Err(SolverError::InvalidParameter(format!("x0[{i}] = {v} is infeasible")));
        }
    }
    let local = state.restrict(x0);
    Ok((state, local))
}

/// `iters` APGD steps on `span{eᵢ : i ∈ S} ∩ ℝⁿ₊` from `x0`; returns `y⁽ᵀ⁾`.
pub fn apgd(q: &MQuadratic, support: &[usize], x0: &[f64], iters: usize) -> Result<Vec<f64>, SolverError> {
    Ok(apgd_iterates(q, support, x0, iters)?.pop().expect("at least y0"))
}

/// All output iterates `y⁽⁰⁾, …, y⁽ᵀ⁾` as dense vectors.
pub fn apgd_iterates(
    q: &MQuadratic,
    support: &[usize],
    x0: &[f64],
    iters: usize,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let (state, local) = setup(q, support, x0)?;
    let mut run = ApgdRun::new(q, &local)?;
    let lower = vec![0.0; local.len()];
    let mut counters = Counters::default();
    let mut out = Vec::with_capacity(iters + 1);
    out.push(x0.to_vec());
    for _ in 0..iters {
        run.step(&state, &lower, &mut counters);
        out.push(state.embed(&run.y).to_dense());
    }
    Ok(out)
}
