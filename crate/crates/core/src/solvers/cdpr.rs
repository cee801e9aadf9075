//! Conjugate directions over a growing support.
//!
//! Stage `t` picks one coordinate `i` with `∇ᵢg(x⁽ᵗ⁾) < 0`, Q-orthogonalizes
//! `u = ∇ᵢg(x⁽ᵗ⁾) eᵢ` against the stored directions, and takes the exact line
//! minimizing step. After the step, `x⁽ᵗ⁺¹⁾` minimizes `g` over the span of
//! all pivots so far and is coordinatewise no smaller than `x⁽ᵗ⁾`. The run ends
//! when no negative gradient entry remains, after exactly `|supp(x*)|` stages.

use crate::error::SolverError;
use crate::problem::{GradientWorkspace, MQuadratic};
use crate::solvers::{select_pivot, Counters, GapBound, Solution, SolverConfig, SupportState};
use crate::sparse::SparseVector;

/// Q-orthogonal directions `d⁽ᵏ⁾` and their curvatures `⟨d⁽ᵏ⁾, Qd⁽ᵏ⁾⟩`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConjugateBasis {
    pub directions: Vec<SparseVector>,
    pub curvatures: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CdprTrace {
    /// Pivot chosen at each stage.
    pub pivots: Vec<usize>,
    /// `x⁽⁰⁾ = 0, x⁽¹⁾, …, x⁽ᵀ⁾`.
    pub iterates: Vec<SparseVector>,
    pub basis: ConjugateBasis,
}

pub fn cdpr(q: &MQuadratic, config: &SolverConfig) -> Result<Solution, SolverError> {
    run(q, config, None)
}

pub fn cdpr_traced(q: &MQuadratic, config: &SolverConfig) -> Result<(Solution, CdprTrace), SolverError> {
    let mut trace = CdprTrace::default();
    let sol = run(q, config, Some(&mut trace))?;
    Ok((sol, trace))
}

fn run(q: &MQuadratic, config: &SolverConfig, mut trace: Option<&mut CdprTrace>) -> Result<Solution, SolverError> {
    let n = q.dim();
    let tol = config.tol(q);
    let mut counters = Counters::default();
    let mut state = SupportState::new(q);
    let mut ws = GradientWorkspace::new(n);

    let mut x: Vec<f64> = Vec::new();
    // Normalized directions d̄⁽ᵏ⁾ = d⁽ᵏ⁾/⟨d⁽ᵏ⁾, Qd⁽ᵏ⁾⟩; d⁽ᵏ⁾ has local length k+1.
    let mut normalized: Vec<Vec<f64>> = Vec::new();
    let mut directions: Vec<Vec<f64>> = Vec::new();

    if let Some(t) = trace.as_deref_mut() {
        t.iterates.push(SparseVector::zeros(n));
    }

    loop {
        ws.clear();
        ws.scatter(q, state.pairs(&x), &mut counters);
        let candidates: Vec<(usize, f64)> = ws
            .negatives(q, tol)
            .into_iter()
            .filter(|&(i, _)| !state.contains(i))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let stage = state.len();
        if stage >= n {
            return Err(SolverError::StageLimit { n });
        }
        let pivot = select_pivot(&candidates)?;
        let gp = ws.value(q, pivot);
        state.extend(&[pivot], &mut counters);
        x.push(0.0);

        let m = stage + 1;
        let row = state.row(stage);
        let mut d = vec![0.0; m];
        d[stage] = gp;
        for (k, (dk, dbar)) in directions.iter().zip(&normalized).enumerate() {
            let mut dot = 0.0;
            for &(c, v) in row {
                if c <= k {
                    dot += v * dbar[c];
                }
            }
            counters.nnz_touched += row.len() as u64;
            let beta = -gp * dot;
            for (dc, &v) in d.iter_mut().zip(dk) {
                *dc += beta * v;
            }
        }

        let mut qd = vec![0.0; m];
        state.mul(&d, &mut qd, &mut counters);
        let curvature: f64 = d.iter().zip(&qd).map(|(a, b)| a * b).sum();
        if !(curvature > 0.0) {
            return Err(SolverError::NonPositiveCurvature { stage, curvature });
        }
        let dbar: Vec<f64> = d.iter().map(|v| v / curvature).collect();
        let eta = -state
            .members()
            .iter()
            .zip(&dbar)
            .map(|(&i, &v)| ws.value(q, i) * v)
            .sum::<f64>();
        for (xi, &di) in x.iter_mut().zip(&d) {
            *xi += eta * di;
        }
        counters.stages += 1;
        state.mark_stage();

        if let Some(t) = trace.as_deref_mut() {
            t.pivots.push(pivot);
            t.iterates.push(state.embed(&x));
            t.basis.directions.push(state.embed(&d));
            t.basis.curvatures.push(curvature);
        }
        directions.push(d);
        normalized.push(dbar);
    }

    let stage_sizes = state.history().to_vec();
    Ok(Solution::from_pairs(
        q,
        state.pairs(&x).collect::<Vec<_>>(),
        GapBound::Exact,
        counters,
        stage_sizes,
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
    fn two_node_trace() {
        let q = two_node(0.1);
        let (sol, trace) = cdpr_traced(&q, &SolverConfig::default()).unwrap();
        assert_eq!(trace.pivots, vec![0, 1]);
        assert!((trace.iterates[1].get(0) - 0.6).abs() < 1e-15);
        assert_eq!(trace.iterates[1].get(1), 0.0);
        assert!((sol.x.get(0) - 0.65).abs() < 1e-15);
        assert!((sol.x.get(1) - 0.15).abs() < 1e-15);
        assert_eq!(sol.counters.stages, 2);
        assert_eq!(sol.gap_bound, GapBound::Exact);
        assert_eq!(sol.stage_sizes, vec![1, 2]);
    }

    #[test]
    fn two_node_large_rho_single_stage() {
        let q = two_node(0.8);
        let sol = cdpr(&q, &SolverConfig::default()).unwrap();
        assert_eq!(sol.support, vec![0]);
        assert!((sol.x.get(0) - 2.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_rhs_returns_zero() {
        let m = SymCsr::from_dense(&[vec![1.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        let q = MQuadratic::new(m, vec![-1.0, 0.0], 0.5, 1.5).unwrap();
        let sol = cdpr(&q, &SolverConfig::default()).unwrap();
        assert!(sol.support.is_empty());
        assert_eq!(sol.counters.stages, 0);
    }
}
