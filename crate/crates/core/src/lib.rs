//! Sparse solvers for nonnegative M-matrix quadratics, with personalized
//! PageRank as the main instance.

pub mod bench;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod problem;
pub mod record;
pub mod solvers;
pub mod sparse;
pub mod verify;

pub use error::{Error, GraphError, OracleError, ProblemError, Result, SolverError};
pub use graph::Graph;
pub use problem::{build_pagerank_quadratic, MQuadratic, OptimalityReport, PageRankInstance, Teleport};
pub use solvers::{solve, AsprVariant, Counters, GapBound, Solution, SolverConfig, SolverKind};
pub use sparse::{SparseVector, SymCsr};
