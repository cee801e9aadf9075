#ifndef PPR_H
#define PPR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ASPR flag: stop a stage early once the restricted gradient is nonpositive.
 */
#define PPR_ASPR_EARLY 1

/**
 * ASPR flag: raise lower bounds where the restricted gradient is nonpositive.
 */
#define PPR_ASPR_CONSTRAINTS 2

typedef enum {
  PPR_STATUS_OK = 0,
  PPR_STATUS_NULL_POINTER = 1,
  PPR_STATUS_INVALID_INPUT = 2,
  PPR_STATUS_SOLVER_FAILED = 3,
  PPR_STATUS_BUFFER_TOO_SMALL = 4,
  PPR_STATUS_PANIC = 5,
} PprStatus;

typedef enum {
  PPR_SOLVER_ISTA = 0,
  PPR_SOLVER_CDPR = 1,
  PPR_SOLVER_ASPR = 2,
} PprSolver;

/**
 * Undirected connected graph.
 */
typedef struct PprGraph PprGraph;

/**
 * Quadratic objective over the nonnegative orthant.
 */
typedef struct PprProblem PprProblem;

/**
 * Result of [`ppr_solve`].
 */
typedef struct PprSolution PprSolution;

/**
 * Work counters of a finished solve.
 */
typedef struct {
  uint64_t stages;
  uint64_t inner_iters;
  uint64_t nnz_touched;
  uint64_t full_gradients;
  uint64_t restricted_gradients;
} PprCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *ppr_last_error_message(void);

/**
 * Builds a graph from `edge_count` pairs stored flat in `edges`
 * (`2 * edge_count` entries, 0-indexed).
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values and `out` must be
 * a valid pointer.
 */
PprStatus ppr_graph_from_edges(size_t n, const size_t *edges, size_t edge_count, PprGraph **out);

/**
 * Reads a graph file. `format` is `"edgelist"` or `"matrixmarket"`.
 *
 * # Safety
 * `path` and `format` must be NUL-terminated strings and `out` a valid pointer.
 */
PprStatus ppr_graph_load(const char *path, const char *format, PprGraph **out);

/**
 * # Safety
 * `graph` must be NULL or a pointer returned by this library.
 */
size_t ppr_graph_node_count(const PprGraph *graph);

/**
 * # Safety
 * `graph` must be NULL or a pointer returned by this library, freed once.
 */
void ppr_graph_free(PprGraph *graph);

/**
 * PageRank quadratic teleporting to `seed_node`.
 *
 * # Safety
 * `graph` must come from this library and `out` must be a valid pointer.
 */
PprStatus ppr_problem_pagerank(const PprGraph *graph,
                               double alpha,
                               double rho,
                               size_t seed_node,
                               PprProblem **out);

/**
 * PageRank quadratic with teleportation weights `weights[k]` on
 * `nodes[k]`. Weights must sum to one.
 *
 * # Safety
 * `nodes` and `weights` must point to `len` readable values, `graph` must
 * come from this library and `out` must be a valid pointer.
 */
PprStatus ppr_problem_pagerank_distribution(const PprGraph *graph,
                                            double alpha,
                                            double rho,
                                            const size_t *nodes,
                                            const double *weights,
                                            size_t len,
                                            PprProblem **out);

/**
 * General quadratic `½xᵀQx − bᵀx` from `nnz` triplets `(rows[k], cols[k],
 * values[k])`, each unordered pair given once. `alpha` and `smoothness`
 * must bracket the spectrum of `Q`.
 *
 * # Safety
 * `rows`, `cols` and `values` must point to `nnz` readable values, `b` to
 * `n` values, and `out` must be a valid pointer.
 */
PprStatus ppr_problem_from_triplets(size_t n,
                                    const size_t *rows,
                                    const size_t *cols,
                                    const double *values,
                                    size_t nnz,
                                    const double *b,
                                    double alpha,
                                    double smoothness,
                                    PprProblem **out);

/**
 * # Safety
 * `problem` must be NULL or a pointer returned by this library.
 */
size_t ppr_problem_dim(const PprProblem *problem);

/**
 * Objective value at the dense point `x` of length `ppr_problem_dim`.
 *
 * # Safety
 * `problem` must come from this library, `x` must point to `len` values
 * and `out` must be a valid pointer.
 */
PprStatus ppr_problem_objective(const PprProblem *problem,
                                const double *x,
                                size_t len,
                                double *out);

/**
 * # Safety
 * `problem` must be NULL or a pointer returned by this library, freed once.
 */
void ppr_problem_free(PprProblem *problem);

/**
 * Runs `solver`. `eps` is the certified gap for ISTA and ASPR and is
 * ignored by CDPR. `aspr_flags` combines `PPR_ASPR_*` bits. A negative
 * `tol_neg` selects the default threshold.
 *
 * # Safety
 * `problem` must come from this library and `out` must be a valid pointer.
 */
PprStatus ppr_solve(const PprProblem *problem,
                    PprSolver solver,
                    double eps,
                    uint32_t aspr_flags,
                    double tol_neg,
                    PprSolution **out);

/**
 * Number of strictly positive entries.
 *
 * # Safety
 * `solution` must be NULL or a pointer returned by this library.
 */
size_t ppr_solution_support_size(const PprSolution *solution);

/**
 * Copies the support and its values, sorted by index, into `indices` and
 * `values`, each with room for `capacity` entries.
 *
 * # Safety
 * `solution` must come from this library; `indices` and `values` must be
 * writable for `capacity` entries.
 */
PprStatus ppr_solution_entries(const PprSolution *solution,
                               size_t *indices,
                               double *values,
                               size_t capacity);

/**
 * Writes the dense solution into `x`, which holds `len` values.
 *
 * # Safety
 * `solution` must come from this library and `x` be writable for `len` values.
 */
PprStatus ppr_solution_dense(const PprSolution *solution, double *x, size_t len);

/**
 * Certified gap of the solution, or 0 for an exact one.
 *
 * # Safety
 * `solution` must be NULL or a pointer returned by this library.
 */
double ppr_solution_gap_bound(const PprSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a pointer returned by this library.
 */
bool ppr_solution_is_exact(const PprSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a pointer returned by this library.
 */
PprCounters ppr_solution_counters(const PprSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a pointer returned by this library, freed once.
 */
void ppr_solution_free(PprSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPR_H */
