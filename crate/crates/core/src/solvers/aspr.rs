//! Accelerated sparse solver: APGD on the span of the known-good set, a
//! small retraction towards zero, then one full gradient to discover new
//! good coordinates.
//!
//! Stage `t` with `m = |S⁽ᵗ⁾|` uses
//! `δ = √(εα / ((1+m)L²))`, `ε̂ = δ²α/2` and
//! `1 + ⌈2√κ · ln((L−α)‖∇_S g(x⁽ᵗ⁾)‖² / (2ε̂α²))⌉` APGD steps, then sets
//! `x⁽ᵗ⁺¹⁾ = max(0, x̄ − δ)` on `S`. The retracted point lies below the
//! subspace minimizer, so every coordinate where its gradient is negative
//! belongs to `supp(x*)`.

use crate::error::SolverError;
use crate::problem::{GradientWorkspace, MQuadratic};
use crate::solvers::apgd::ApgdRun;
use crate::solvers::{Counters, GapBound, Solution, SolverConfig, SupportState};
use crate::sparse::SparseVector;

/// Optional modifications of the base algorithm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AsprVariant {
    /// Periodically take a full gradient inside APGD and stop the stage as
    /// soon as `∇_S g ≤ 0` and a new negative coordinate appears.
    pub early_termination: bool,
    /// Raise per-coordinate lower bounds to any iterate with `∇_S g ≤ 0`.
    pub updating_constraints: bool,
    /// Inner iterations between full gradients; defaults to `|S⁽ᵗ⁾|`.
    pub full_grad_period: Option<usize>,
}

impl AsprVariant {
    pub const PLAIN: Self = Self {
        early_termination: false,
        updating_constraints: false,
        full_grad_period: None,
    };

    pub fn early() -> Self {
        Self {
            early_termination: true,
            ..Self::PLAIN
        }
    }

    pub fn constraints() -> Self {
        Self {
            updating_constraints: true,
            ..Self::PLAIN
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.early_termination, self.updating_constraints) {
            (false, false) => "plain",
            (true, false) => "early",
            (false, true) => "constraints",
            (true, true) => "early+constraints",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsprStage {
    /// `S⁽ᵗ⁾` (sorted), the set APGD ran on.
    pub known_good: Vec<usize>,
    /// `x⁽ᵗ⁾`.
    pub start: SparseVector,
    /// `x⁽ᵗ⁺¹⁾`, after retraction or early stop.
    pub end: SparseVector,
    /// Coordinates added to form `S⁽ᵗ⁺¹⁾`.
    pub added: Vec<usize>,
    pub delta: f64,
    pub planned_inner: u64,
    pub inner_iters: u64,
    pub early_terminated: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AsprTrace {
    /// `S⁽⁰⁾`.
    pub initial: Vec<usize>,
    pub stages: Vec<AsprStage>,
    /// Coordinates that held a nonzero value in any iterate.
    pub ever_nonzero: Vec<usize>,
    /// Coordinates added by early termination.
    pub early_added: Vec<usize>,
    /// Lower-bound vector after each update.
    pub lower_bounds: Vec<SparseVector>,
    /// `(S, x)` pairs observed with `x` supported on `S` and `∇_S g(x) ≤ 0`.
    pub certified_states: Vec<(Vec<usize>, SparseVector)>,
}

/// `(δ, ε̂)` for accuracy `eps` and a known-good set of size `m`.
pub fn aspr_schedule(eps: f64, alpha: f64, smoothness: f64, m: usize) -> (f64, f64) {
    let delta = (eps * alpha / ((1.0 + m as f64) * smoothness * smoothness)).sqrt();
    (delta, delta * delta * alpha / 2.0)
}

/// APGD step count reaching accuracy `eps_hat` from a point with restricted
/// gradient norm² `grad_norm2`. Zero when the gradient vanishes; one when
/// `L = α`; at least one otherwise.
pub fn inner_iterations(alpha: f64, smoothness: f64, grad_norm2: f64, eps_hat: f64) -> u64 {
    if grad_norm2 == 0.0 {
        return 0;
    }
    if smoothness <= alpha {
        return 1;
    }
    let kappa = smoothness / alpha;
    let ratio = (smoothness - alpha) * grad_norm2 / (2.0 * eps_hat * alpha * alpha);
    let steps = (2.0 * kappa.sqrt() * ratio.ln()).ceil();
    1 + steps.max(0.0) as u64
}

pub fn aspr(q: &MQuadratic, eps: f64, variant: AsprVariant, config: &SolverConfig) -> Result<Solution, SolverError> {
    run(q, eps, variant, config, None)
}

pub fn aspr_traced(
    q: &MQuadratic,
    eps: f64,
    variant: AsprVariant,
    config: &SolverConfig,
) -> Result<(Solution, AsprTrace), SolverError> {
    let mut trace = AsprTrace::default();
    let sol = run(q, eps, variant, config, Some(&mut trace))?;
    Ok((sol, trace))
}

struct Tracker<'t> {
    trace: Option<&'t mut AsprTrace>,
    ever: Vec<bool>,
}

impl Tracker<'_> {
    fn note(&mut self, state: &SupportState, vectors: &[&[f64]]) {
        if self.trace.is_none() {
            return;
        }
        for v in vectors {
            for (k, &val) in v.iter().enumerate() {
                let i = state.members()[k];
                if val != 0.0 && !self.ever[i] {
                    self.ever[i] = true;
                    if let Some(t) = self.trace.as_deref_mut() {
                        t.ever_nonzero.push(i);
                    }
                }
            }
        }
    }

    fn certified(&mut self, state: &SupportState, x: &[f64]) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.certified_states.push((state.sorted_members(), state.embed(x)));
        }
    }

    fn lower(&mut self, state: &SupportState, lower: &[f64]) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.lower_bounds.push(state.embed(lower));
        }
    }
}

fn raise(lower: &mut [f64], x: &[f64]) -> bool {
    let mut changed = false;
    for (l, &v) in lower.iter_mut().zip(x) {
        if v > *l {
            *l = v;
            changed = true;
        }
    }
    changed
}

fn run(
    q: &MQuadratic,
    eps: f64,
    variant: AsprVariant,
    config: &SolverConfig,
    trace: Option<&mut AsprTrace>,
) -> Result<Solution, SolverError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SolverError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let n = q.dim();
    let tol = config.tol(q);
    let (alpha, smoothness) = (q.alpha(), q.smoothness());
    let mut counters = Counters::default();
    let mut state = SupportState::new(q);
    let mut ws = GradientWorkspace::new(n);
    let mut tracker = Tracker {
        trace,
        ever: vec![false; n],
    };

    ws.scatter(q, std::iter::empty(), &mut counters);
    let initial: Vec<usize> = ws.negatives(q, tol).into_iter().map(|e| e.0).collect();
    if let Some(t) = tracker.trace.as_deref_mut() {
        t.initial = initial.clone();
    }
    if initial.is_empty() {
        return Ok(Solution::from_pairs(q, [], GapBound::Certified(eps), counters, Vec::new()));
    }
    state.extend(&initial, &mut counters);
    state.mark_stage();

    let mut x = vec![0.0; state.len()];
    let mut lower = vec![0.0; state.len()];
    let mut grad = vec![0.0; state.len()];

    loop {
        if counters.stages as usize >= n {
            return Err(SolverError::StageLimit { n });
        }
        counters.stages += 1;
        let m = state.len();
        let start = tracker.trace.as_ref().map(|_| state.embed(&x));
        let (delta, eps_hat) = aspr_schedule(eps, alpha, smoothness, m);

        state.restricted_gradient(&x, &mut grad, &mut counters);
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        let planned = inner_iterations(alpha, smoothness, norm2, eps_hat);
        let period = variant.full_grad_period.unwrap_or(m).max(1) as u64;

        let mut apgd = ApgdRun::new(q, &x)?;
        let mut early_added: Option<Vec<usize>> = None;
        let mut done = 0u64;
        while done < planned {
            apgd.step(&state, &lower, &mut counters);
            done += 1;
            tracker.note(&state, &[&apgd.x, &apgd.y, &apgd.z]);

            if variant.updating_constraints && apgd.grad.iter().all(|&g| g <= 0.0) {
                tracker.certified(&state, &apgd.x);
                if raise(&mut lower, &apgd.x) {
                    tracker.lower(&state, &lower);
                }
            }

            if variant.early_termination && done.is_multiple_of(period) && done < planned {
                ws.clear();
                ws.scatter(q, state.pairs(&apgd.y), &mut counters);
                let nonpositive_on_s = state.members().iter().all(|&i| ws.value(q, i) <= 0.0);
                if nonpositive_on_s {
                    tracker.certified(&state, &apgd.y);
                    if variant.updating_constraints && raise(&mut lower, &apgd.y) {
                        tracker.lower(&state, &lower);
                    }
                    let fresh: Vec<usize> = ws
                        .negatives(q, tol)
                        .into_iter()
                        .map(|e| e.0)
                        .filter(|&i| !state.contains(i))
                        .collect();
                    if !fresh.is_empty() {
                        early_added = Some(fresh);
                        break;
                    }
                }
            }
        }

        let (added, early) = match early_added {
            Some(fresh) => {
                x.copy_from_slice(&apgd.y);
                (fresh, true)
            }
            None => {
                let floor = if variant.updating_constraints { &lower[..] } else { &[][..] };
                let source = if done == 0 { &x[..] } else { &apgd.y[..] };
                let retracted: Vec<f64> = source
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (v - delta).max(floor.get(k).copied().unwrap_or(0.0)).max(0.0))
                    .collect();
                x = retracted;
                ws.clear();
                ws.scatter(q, state.pairs(&x), &mut counters);
                if state.members().iter().all(|&i| ws.value(q, i) <= 0.0) {
                    tracker.certified(&state, &x);
                    if variant.updating_constraints && raise(&mut lower, &x) {
                        tracker.lower(&state, &lower);
                    }
                }
                let fresh: Vec<usize> = ws
                    .negatives(q, tol)
                    .into_iter()
                    .map(|e| e.0)
                    .filter(|&i| !state.contains(i))
                    .collect();
                (fresh, false)
            }
        };
        tracker.note(&state, &[&x]);

        if let Some(t) = tracker.trace.as_deref_mut() {
            if early {
                t.early_added.extend(&added);
            }
            t.stages.push(AsprStage {
                known_good: state.sorted_members(),
                start: start.expect("trace enabled"),
                end: state.embed(&x),
                added: added.clone(),
                delta,
                planned_inner: planned,
                inner_iters: done,
                early_terminated: early,
            });
        }

        if added.is_empty() {
            break;
        }
        state.extend(&added, &mut counters);
        state.mark_stage();
        x.resize(state.len(), 0.0);
        lower.resize(state.len(), 0.0);
        grad.resize(state.len(), 0.0);
    }

    Ok(Solution::from_pairs(
        q,
        state.pairs(&x).collect::<Vec<_>>(),
        GapBound::Certified(eps),
        counters,
        state.history().to_vec(),
    ))
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
    fn schedule_example() {
        let (delta, eps_hat) = aspr_schedule(1e-3, 0.5, 1.0, 1);
        assert!((delta - 2.5e-4f64.sqrt()).abs() < 1e-15);
        assert!((delta - 1.5811e-2).abs() < 1e-6);
        assert!((eps_hat - 6.25e-5).abs() < 1e-18);
    }

    #[test]
    fn inner_iteration_edge_cases() {
        assert_eq!(inner_iterations(0.5, 1.0, 0.0, 1e-6), 0);
        assert_eq!(inner_iterations(1.0, 1.0, 3.0, 1e-6), 1);
        // log argument below one: still a single step.
        assert_eq!(inner_iterations(0.5, 1.0, 1e-20, 1e-6), 1);
        let kappa: f64 = 2.0;
        let want = 1 + (2.0 * kappa.sqrt() * (0.5f64 * 0.2025 / (2.0 * 1e-6 * 0.25)).ln()).ceil() as u64;
        assert_eq!(inner_iterations(0.5, 1.0, 0.2025, 1e-6), want);
    }

    #[test]
    fn two_node_all_variants() {
        let q = two_node(0.1);
        let opt = q.objective(&[0.65, 0.15]);
        for variant in [AsprVariant::PLAIN, AsprVariant::early(), AsprVariant::constraints()] {
            let (sol, trace) = aspr_traced(&q, 1e-6, variant, &SolverConfig::default()).unwrap();
            assert!(q.objective_sparse(&sol.x) - opt <= 1e-6, "{}", variant.name());
            assert!(sol.support.iter().all(|&i| i < 2));
            assert_eq!(trace.initial, vec![0]);
            assert_eq!(trace.stages[0].added, vec![1]);
            assert_eq!(sol.gap_bound, GapBound::Certified(1e-6));
        }
    }

    #[test]
    fn nonpositive_rhs_returns_zero() {
        let m = SymCsr::from_dense(&[vec![1.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        let q = MQuadratic::new(m, vec![-1.0, -0.1], 0.5, 1.5).unwrap();
        let sol = aspr(&q, 1e-9, AsprVariant::PLAIN, &SolverConfig::default()).unwrap();
        assert!(sol.support.is_empty());
        assert_eq!(sol.counters.stages, 0);
    }

    #[test]
    fn rejects_bad_eps() {
        let q = two_node(0.1);
        assert!(aspr(&q, 0.0, AsprVariant::PLAIN, &SolverConfig::default()).is_err());
        assert!(aspr(&q, -1.0, AsprVariant::PLAIN, &SolverConfig::default()).is_err());
    }
}
