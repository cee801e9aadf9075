//! C bindings for `ppr-core`.
//!
//! Every fallible function returns a [`PprStatus`]. On failure the message is
//! kept per thread and read back with [`ppr_last_error_message`]. Objects are
//! handed out as opaque pointers and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use ppr_core::io::{load_graph, GraphFormat};
use ppr_core::{
    build_pagerank_quadratic, solve, AsprVariant, Error, GapBound, Graph, MQuadratic, PageRankInstance, Solution,
    SolverConfig, SolverKind, SymCsr, Teleport,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PprStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    SolverFailed = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PprSolver {
    Ista = 0,
    Cdpr = 1,
    Aspr = 2,
}

/// ASPR flag: stop a stage early once the restricted gradient is nonpositive.
pub const PPR_ASPR_EARLY: u32 = 1;
/// ASPR flag: raise lower bounds where the restricted gradient is nonpositive.
pub const PPR_ASPR_CONSTRAINTS: u32 = 2;

/// Work counters of a finished solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PprCounters {
    pub stages: u64,
    pub inner_iters: u64,
    pub nnz_touched: u64,
    pub full_gradients: u64,
    pub restricted_gradients: u64,
}

/// Undirected connected graph.
pub struct PprGraph(Graph);

/// Quadratic objective over the nonnegative orthant.
pub struct PprProblem(MQuadratic);

/// Result of [`ppr_solve`].
pub struct PprSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: PprStatus, message: impl Into<String>) -> PprStatus {
    set_error(message);
    status
}

fn status_of(err: &Error) -> PprStatus {
    match err {
        Error::Solver(_) => PprStatus::SolverFailed,
        _ => PprStatus::InvalidInput,
    }
}

fn guard(body: impl FnOnce() -> PprStatus) -> PprStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PprStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], PprStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(PprStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, PprStatus> {
    if s.is_null() {
        return Err(fail(PprStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(PprStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! deref {
    ($p:expr, $what:expr) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return fail(PprStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> PprStatus {
    *out = Box::into_raw(Box::new(value));
    PprStatus::Ok
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ppr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a graph from `edge_count` pairs stored flat in `edges`
/// (`2 * edge_count` entries, 0-indexed).
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values and `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_graph_from_edges(
    n: usize,
    edges: *const usize,
    edge_count: usize,
    out: *mut *mut PprGraph,
) -> PprStatus {
    guard(|| {
        if out.is_null() {
            return fail(PprStatus::NullPointer, "out is null");
        }
        let Some(len) = edge_count.checked_mul(2) else {
            return fail(PprStatus::InvalidInput, "edge_count overflows");
        };
        let flat = try_status!(read_slice(edges, len, "edges"));
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        match Graph::from_edges(n, &pairs) {
            Ok(g) => write_out(out, PprGraph(g)),
            Err(e) => fail(PprStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Reads a graph file. `format` is `"edgelist"` or `"matrixmarket"`.
///
/// # Safety
/// `path` and `format` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_graph_load(
    path: *const c_char,
    format: *const c_char,
    out: *mut *mut PprGraph,
) -> PprStatus {
    guard(|| {
        if out.is_null() {
            return fail(PprStatus::NullPointer, "out is null");
        }
        let path = try_status!(read_str(path, "path"));
        let format: GraphFormat = match try_status!(read_str(format, "format")).parse() {
            Ok(f) => f,
            Err(e) => return fail(PprStatus::InvalidInput, e),
        };
        match load_graph(path, format) {
            Ok(g) => write_out(out, PprGraph(g)),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `graph` must be NULL or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ppr_graph_node_count(graph: *const PprGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// # Safety
/// `graph` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ppr_graph_free(graph: *mut PprGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// PageRank quadratic teleporting to `seed_node`.
///
/// # Safety
/// `graph` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_problem_pagerank(
    graph: *const PprGraph,
    alpha: f64,
    rho: f64,
    seed_node: usize,
    out: *mut *mut PprProblem,
) -> PprStatus {
    guard(|| {
        let graph = deref!(graph, "graph");
        pagerank(graph, alpha, rho, Teleport::Seed(seed_node), out)
    })
}

/// PageRank quadratic with teleportation weights `weights[k]` on
/// `nodes[k]`. Weights must sum to one.
///
/// # Safety
/// `nodes` and `weights` must point to `len` readable values, `graph` must
/// come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_problem_pagerank_distribution(
    graph: *const PprGraph,
    alpha: f64,
    rho: f64,
    nodes: *const usize,
    weights: *const f64,
    len: usize,
    out: *mut *mut PprProblem,
) -> PprStatus {
    guard(|| {
        let graph = deref!(graph, "graph");
        let nodes = try_status!(read_slice(nodes, len, "nodes"));
        let weights = try_status!(read_slice(weights, len, "weights"));
        let pairs = nodes.iter().copied().zip(weights.iter().copied()).collect();
        pagerank(graph, alpha, rho, Teleport::Distribution(pairs), out)
    })
}

unsafe fn pagerank(graph: &PprGraph, alpha: f64, rho: f64, teleport: Teleport, out: *mut *mut PprProblem) -> PprStatus {
    if out.is_null() {
        return fail(PprStatus::NullPointer, "out is null");
    }
    let q = PageRankInstance::new(graph.0.clone(), alpha, rho, teleport).and_then(|inst| build_pagerank_quadratic(&inst));
    match q {
        Ok(q) => write_out(out, PprProblem(q)),
        Err(e) => fail(PprStatus::InvalidInput, e.to_string()),
    }
}

/// General quadratic `½xᵀQx − bᵀx` from `nnz` triplets `(rows[k], cols[k],
/// values[k])`, each unordered pair given once. `alpha` and `smoothness`
/// must bracket the spectrum of `Q`.
///
/// # Safety
/// `rows`, `cols` and `values` must point to `nnz` readable values, `b` to
/// `n` values, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_problem_from_triplets(
    n: usize,
    rows: *const usize,
    cols: *const usize,
    values: *const f64,
    nnz: usize,
    b: *const f64,
    alpha: f64,
    smoothness: f64,
    out: *mut *mut PprProblem,
) -> PprStatus {
    guard(|| {
        if out.is_null() {
            return fail(PprStatus::NullPointer, "out is null");
        }
        let rows = try_status!(read_slice(rows, nnz, "rows"));
        let cols = try_status!(read_slice(cols, nnz, "cols"));
        let values = try_status!(read_slice(values, nnz, "values"));
        let b = try_status!(read_slice(b, n, "b"));
        let triplets: Vec<(usize, usize, f64)> = (0..nnz).map(|k| (rows[k], cols[k], values[k])).collect();
        let q = SymCsr::from_triplets(n, &triplets).and_then(|m| MQuadratic::new(m, b.to_vec(), alpha, smoothness));
        match q {
            Ok(q) => write_out(out, PprProblem(q)),
            Err(e) => fail(PprStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `problem` must be NULL or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ppr_problem_dim(problem: *const PprProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.dim())
}

/// Objective value at the dense point `x` of length `ppr_problem_dim`.
///
/// # Safety
/// `problem` must come from this library, `x` must point to `len` values
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_problem_objective(
    problem: *const PprProblem,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> PprStatus {
    guard(|| {
        let problem = deref!(problem, "problem");
        if out.is_null() {
            return fail(PprStatus::NullPointer, "out is null");
        }
        let x = try_status!(read_slice(x, len, "x"));
        if len != problem.0.dim() {
            return fail(
                PprStatus::InvalidInput,
                format!("x has length {len}, expected {}", problem.0.dim()),
            );
        }
        *out = problem.0.objective(x);
        PprStatus::Ok
    })
}

/// # Safety
/// `problem` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ppr_problem_free(problem: *mut PprProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Runs `solver`. `eps` is the certified gap for ISTA and ASPR and is
/// ignored by CDPR. `aspr_flags` combines `PPR_ASPR_*` bits. A negative
/// `tol_neg` selects the default threshold.
///
/// # Safety
/// `problem` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppr_solve(
    problem: *const PprProblem,
    solver: PprSolver,
    eps: f64,
    aspr_flags: u32,
    tol_neg: f64,
    out: *mut *mut PprSolution,
) -> PprStatus {
    guard(|| {
        let problem = deref!(problem, "problem");
        if out.is_null() {
            return fail(PprStatus::NullPointer, "out is null");
        }
        let kind = match solver {
            PprSolver::Ista => SolverKind::Ista,
            PprSolver::Cdpr => SolverKind::Cdpr,
            PprSolver::Aspr => SolverKind::Aspr,
        };
        if aspr_flags & !(PPR_ASPR_EARLY | PPR_ASPR_CONSTRAINTS) != 0 {
            return fail(PprStatus::InvalidInput, format!("unknown ASPR flags {aspr_flags:#x}"));
        }
        if aspr_flags != 0 && kind != SolverKind::Aspr {
            return fail(PprStatus::InvalidInput, "ASPR flags given for a different solver");
        }
        let variant = AsprVariant {
            early_termination: aspr_flags & PPR_ASPR_EARLY != 0,
            updating_constraints: aspr_flags & PPR_ASPR_CONSTRAINTS != 0,
            ..AsprVariant::PLAIN
        };
        let config = SolverConfig {
            tol_neg: (tol_neg >= 0.0).then_some(tol_neg),
            ..SolverConfig::default()
        };
        match solve(&problem.0, kind, eps, variant, &config) {
            Ok(s) => write_out(out, PprSolution(s)),
            Err(e) => fail(PprStatus::SolverFailed, e.to_string()),
        }
    })
}

/// Number of strictly positive entries.
///
/// # Safety
/// `solution` must be NULL or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_support_size(solution: *const PprSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.support.len())
}

/// Copies the support and its values, sorted by index, into `indices` and
/// `values`, each with room for `capacity` entries.
///
/// # Safety
/// `solution` must come from this library; `indices` and `values` must be
/// writable for `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_entries(
    solution: *const PprSolution,
    indices: *mut usize,
    values: *mut f64,
    capacity: usize,
) -> PprStatus {
    guard(|| {
        let sol = deref!(solution, "solution");
        let k = sol.0.x.nnz();
        if capacity < k {
            return fail(PprStatus::BufferTooSmall, format!("need room for {k} entries, got {capacity}"));
        }
        if k > 0 && (indices.is_null() || values.is_null()) {
            return fail(PprStatus::NullPointer, "indices or values is null");
        }
        for (slot, (i, v)) in sol.0.x.iter().enumerate() {
            *indices.add(slot) = i;
            *values.add(slot) = v;
        }
        PprStatus::Ok
    })
}

/// Writes the dense solution into `x`, which holds `len` values.
///
/// # Safety
/// `solution` must come from this library and `x` be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_dense(solution: *const PprSolution, x: *mut f64, len: usize) -> PprStatus {
    guard(|| {
        let sol = deref!(solution, "solution");
        let n = sol.0.x.dim;
        if len < n {
            return fail(PprStatus::BufferTooSmall, format!("need room for {n} values, got {len}"));
        }
        if x.is_null() {
            return fail(PprStatus::NullPointer, "x is null");
        }
        let out = slice::from_raw_parts_mut(x, len);
        out.fill(0.0);
        for (i, v) in sol.0.x.iter() {
            out[i] = v;
        }
        PprStatus::Ok
    })
}

/// Certified gap of the solution, or 0 for an exact one.
///
/// # Safety
/// `solution` must be NULL or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_gap_bound(solution: *const PprSolution) -> f64 {
    match solution.as_ref().map(|s| s.0.gap_bound) {
        Some(GapBound::Certified(eps)) => eps,
        Some(GapBound::Exact) => 0.0,
        None => f64::NAN,
    }
}

/// # Safety
/// `solution` must be NULL or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_is_exact(solution: *const PprSolution) -> bool {
    matches!(solution.as_ref().map(|s| s.0.gap_bound), Some(GapBound::Exact))
}

/// # Safety
/// `solution` must be NULL or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_counters(solution: *const PprSolution) -> PprCounters {
    solution.as_ref().map_or_else(PprCounters::default, |s| {
        let c = s.0.counters;
        PprCounters {
            stages: c.stages,
            inner_iters: c.inner_iters,
            nnz_touched: c.nnz_touched,
            full_gradients: c.full_gradients,
            restricted_gradients: c.restricted_gradients,
        }
    })
}

/// # Safety
/// `solution` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ppr_solution_free(solution: *mut PprSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
