use thiserror::Error;

use crate::solvers::Solution;

/// Problems with graph construction or graph files.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at {}", location(*line, *node))]
    SelfLoop { node: usize, line: Option<usize> },
    #[error("duplicate edge ({u},{v}){}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    DuplicateEdge {
        u: usize,
        v: usize,
        line: Option<usize>,
    },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn location(line: Option<usize>, node: usize) -> String {
    match line {
        Some(l) => format!("line {l}"),
        None => format!("node {node}"),
    }
}

/// Invalid problem data (parameters, vectors, matrices).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("teleportation vector is not a distribution (sum = {sum})")]
    NotOnSimplex { sum: f64 },
    #[error("matrix is not a valid M-matrix: {0}")]
    NotMMatrix(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
    #[error("non-positive curvature {curvature} at stage {stage}")]
    NonPositiveCurvature { stage: usize, curvature: f64 },
    #[error("stage count exceeded the dimension {n}")]
    StageLimit { n: usize },
    #[error("iteration cap of {cap} reached")]
    IterationCap { cap: usize, best: Box<Solution> },
    #[error("empty pivot candidate set")]
    EmptyPivotSet,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {n} exceeds the oracle limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("no support candidate satisfied the KKT conditions; near misses: {near_misses:?}")]
    NoAcceptedSupport {
        near_misses: Vec<(Vec<usize>, f64)>,
    },
    #[error("projected oracle hit its iteration cap ({0})")]
    IterationCap(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance generation failed: {0}")]
    Generator(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
