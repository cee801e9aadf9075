//! Sparse solvers for `min_{x ≥ 0} g(x)`.
//!
//! Every solver grows a set of known-good coordinates `S` from the empty set
//! and only ever writes coordinates of `S`, which stays inside the support of
//! the optimum. Work is recorded in [`Counters`] in units of sparse-matrix
//! nonzeros read.

mod apgd;
mod aspr;
mod cdpr;
mod ista;
mod pgd;
mod pivot;
mod support;

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::problem::{MQuadratic, OptimalityReport};
use crate::sparse::SparseVector;

pub use apgd::{apgd, apgd_iterates, ApgdCoefficients, ApgdWeights};
pub use aspr::{aspr, aspr_traced, aspr_schedule, inner_iterations, AsprStage, AsprTrace, AsprVariant};
pub use cdpr::{cdpr, cdpr_traced, CdprTrace, ConjugateBasis};
pub use ista::{ista_baseline, ista_traced, IstaTrace};
pub use pgd::{pgd, pgd_iterates};
pub use pivot::select_pivot;
pub use support::SupportState;

/// Work record of a single run. All fields only grow during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub stages: u64,
    pub inner_iters: u64,
    pub nnz_touched: u64,
    pub full_gradients: u64,
    pub restricted_gradients: u64,
}

/// Accuracy guarantee attached to a [`Solution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapBound {
    /// Exact up to floating point.
    Exact,
    /// `g(x) − g(x*) ≤ ε`.
    Certified(f64),
}

impl Serialize for GapBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GapBound::Exact => serializer.serialize_str("exact"),
            GapBound::Certified(eps) => serializer.serialize_f64(*eps),
        }
    }
}

impl<'de> Deserialize<'de> for GapBound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct GapVisitor;
        impl Visitor<'_> for GapVisitor {
            type Value = GapBound;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "\"exact\" or a number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<GapBound, E> {
                if v == "exact" {
                    Ok(GapBound::Exact)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<GapBound, E> {
                Ok(GapBound::Certified(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<GapBound, E> {
                Ok(GapBound::Certified(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<GapBound, E> {
                Ok(GapBound::Certified(v as f64))
            }
        }
        deserializer.deserialize_any(GapVisitor)
    }
}

impl fmt::Display for GapBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapBound::Exact => write!(f, "exact"),
            GapBound::Certified(eps) => write!(f, "{eps}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: SparseVector,
    /// Sorted `supp(x)`; every listed coordinate is strictly positive.
    pub support: Vec<usize>,
    pub gap_bound: GapBound,
    pub report: OptimalityReport,
    pub counters: Counters,
    /// `|S|` after each stage.
    pub stage_sizes: Vec<usize>,
}

impl Solution {
    pub(crate) fn from_pairs(
        q: &MQuadratic,
        pairs: impl IntoIterator<Item = (usize, f64)>,
        gap_bound: GapBound,
        counters: Counters,
        stage_sizes: Vec<usize>,
    ) -> Self {
        let x = SparseVector::from_pairs(q.dim(), pairs.into_iter().filter(|p| p.1 > 0.0));
        let report = q.check_optimality(&x, q.pagerank_box());
        Self {
            support: x.indices.clone(),
            x,
            gap_bound,
            report,
            counters,
            stage_sizes,
        }
    }
}

/// Options shared by all solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Threshold below which a gradient entry counts as negative; defaults to
    /// [`MQuadratic::default_tol_neg`].
    pub tol_neg: Option<f64>,
    /// Iteration cap for the ISTA baseline.
    pub max_iters: usize,
    /// Record per-stage traces in the `*_traced` entry points.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_neg: None,
            max_iters: 50_000_000,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub(crate) fn tol(&self, q: &MQuadratic) -> f64 {
        self.tol_neg.unwrap_or_else(|| q.default_tol_neg())
    }
}

/// Solver selector used by the CLI, the benchmark and the C bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Ista,
    Cdpr,
    Aspr,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ista => "ista",
            SolverKind::Cdpr => "cdpr",
            SolverKind::Aspr => "aspr",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ista" => Ok(SolverKind::Ista),
            "cdpr" => Ok(SolverKind::Cdpr),
            "aspr" => Ok(SolverKind::Aspr),
            other => Err(format!("unknown solver '{other}' (expected ista, cdpr or aspr)")),
        }
    }
}

/// Runs the selected solver. `eps` is ignored by CDPR.
pub fn solve(
    q: &MQuadratic,
    kind: SolverKind,
    eps: f64,
    variant: AsprVariant,
    config: &SolverConfig,
) -> Result<Solution, crate::error::SolverError> {
    let config = SolverConfig {
        record_trace: false,
        ..config.clone()
    };
    match kind {
        SolverKind::Ista => ista_baseline(q, eps, &config),
        SolverKind::Cdpr => cdpr(q, &config),
        SolverKind::Aspr => aspr(q, eps, variant, &config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_bound_json() {
        assert_eq!(serde_json::to_string(&GapBound::Exact).unwrap(), "\"exact\"");
        assert_eq!(serde_json::to_string(&GapBound::Certified(1e-6)).unwrap(), "1e-6");
        let back: GapBound = serde_json::from_str("1e-6").unwrap();
        assert_eq!(back, GapBound::Certified(1e-6));
        let back: GapBound = serde_json::from_str("\"exact\"").unwrap();
        assert_eq!(back, GapBound::Exact);
    }

    #[test]
    fn solver_kind_parse() {
        assert_eq!("cdpr".parse::<SolverKind>(), Ok(SolverKind::Cdpr));
        assert!("fista".parse::<SolverKind>().is_err());
    }
}
