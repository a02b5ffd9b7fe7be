#ifndef BREGMAN_PDMM_H
#define BREGMAN_PDMM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BpdmmMirror {
  BPDMM_MIRROR_SQUARED_EUCLIDEAN = 0,
  BPDMM_MIRROR_NEGATIVE_ENTROPY = 1,
} BpdmmMirror;

typedef enum BpdmmStatus {
  BPDMM_STATUS_OK = 0,
  BPDMM_STATUS_INVALID_ARGUMENT = 1,
  BPDMM_STATUS_NULL_POINTER = 2,
  BPDMM_STATUS_SOLVER_FAILURE = 3,
  BPDMM_STATUS_IO = 4,
  BPDMM_STATUS_PANIC = 5,
} BpdmmStatus;

typedef enum BpdmmVariant {
  BPDMM_VARIANT_EUCLID = 0,
  BPDMM_VARIANT_BREGMAN = 1,
} BpdmmVariant;

typedef struct BpdmmAveraging BpdmmAveraging;

typedef struct BpdmmGraph BpdmmGraph;

typedef struct BpdmmProblem BpdmmProblem;

typedef struct BpdmmTrace BpdmmTrace;

/**
 * One trace row. Absent values are NaN.
 */
typedef struct BpdmmRecord {
  uint64_t t;
  double objective_gap;
  double consensus_residual;
  double r;
  double v;
  uint64_t wall_nanos;
} BpdmmRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *bpdmm_last_error(void);

/**
 * Draws a connected Erdős–Rényi graph.
 */
enum BpdmmStatus bpdmm_graph_erdos_renyi(size_t m,
                                         double p_edge,
                                         uint64_t seed,
                                         struct BpdmmGraph **out);

/**
 * Builds a graph from `count` edges given as index pairs in `edges`
 * (`2 * count` entries).
 *
 * # Safety
 * `edges` must point to `2 * count` readable values.
 */
enum BpdmmStatus bpdmm_graph_from_edges(size_t m,
                                        const size_t *edges,
                                        size_t count,
                                        struct BpdmmGraph **out);

/**
 * # Safety
 * `g` must be a live handle.
 */
size_t bpdmm_graph_vertex_count(const struct BpdmmGraph *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
size_t bpdmm_graph_edge_count(const struct BpdmmGraph *g);

/**
 * # Safety
 * `g` must come from this library and not be used afterwards; null is ignored.
 */
void bpdmm_graph_free(struct BpdmmGraph *g);

/**
 * `P = I − L/(2 d_max)`.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum BpdmmStatus bpdmm_averaging_laplacian(const struct BpdmmGraph *g, struct BpdmmAveraging **out);

/**
 * Averaging matrix on `g` with small second eigenvalue magnitude.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum BpdmmStatus bpdmm_averaging_optimize(const struct BpdmmGraph *g,
                                          size_t iters,
                                          struct BpdmmAveraging **out);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum BpdmmStatus bpdmm_averaging_lambda2(const struct BpdmmAveraging *p, double *out);

/**
 * # Safety
 * `p` must be a live handle.
 */
size_t bpdmm_averaging_dim(const struct BpdmmAveraging *p);

/**
 * Copies the `m × m` entries, row-major, into `out` (length `len ≥ m²`).
 *
 * # Safety
 * `out` must have room for `len` values.
 */
enum BpdmmStatus bpdmm_averaging_entries(const struct BpdmmAveraging *p, double *out, size_t len);

/**
 * # Safety
 * As for [`bpdmm_graph_free`].
 */
void bpdmm_averaging_free(struct BpdmmAveraging *p);

/**
 * Linear costs `c` (`m × n`, row `i` is vertex `i`) over the simplex when
 * `simplex` is nonzero, else over free space.
 *
 * # Safety
 * `costs` must point to `m * n` readable values.
 */
enum BpdmmStatus bpdmm_problem_linear(size_t m,
                                      size_t n,
                                      const double *costs,
                                      int simplex,
                                      struct BpdmmProblem **out);

/**
 * # Safety
 * As for [`bpdmm_graph_free`].
 */
void bpdmm_problem_free(struct BpdmmProblem *p);

/**
 * Runs one engine with a JSON solver configuration (keys `rho`, `tau`,
 * `delta`, `gamma`, `mirror`, `max_iters`, `stop_tol`, `seed`, `strict`).
 *
 * Returns [`BpdmmStatus::SolverFailure`] with `*out` set when an iteration
 * fails part way; the trace then ends at the last completed iteration.
 *
 * # Safety
 * Handles must be live; `config_json` must be a NUL-terminated string.
 */
enum BpdmmStatus bpdmm_run(const struct BpdmmProblem *problem,
                           const struct BpdmmAveraging *p,
                           const char *config_json,
                           enum BpdmmVariant variant,
                           struct BpdmmTrace **out);

/**
 * Number of records (iterations run plus one).
 *
 * # Safety
 * `t` must be a live handle.
 */
size_t bpdmm_trace_len(const struct BpdmmTrace *t);

/**
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum BpdmmStatus bpdmm_trace_record(const struct BpdmmTrace *t,
                                    size_t index,
                                    struct BpdmmRecord *out);

/**
 * Copies the final primal iterate (`m × n`, row-major) into `out`.
 *
 * # Safety
 * `out` must have room for `len` values.
 */
enum BpdmmStatus bpdmm_trace_final_primal(const struct BpdmmTrace *t, double *out, size_t len);

/**
 * Writes the trace as CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum BpdmmStatus bpdmm_trace_write_csv(const struct BpdmmTrace *t, const char *path);

/**
 * # Safety
 * As for [`bpdmm_graph_free`].
 */
void bpdmm_trace_free(struct BpdmmTrace *t);

/**
 * Euclidean projection of `v` onto the probability simplex.
 *
 * # Safety
 * `v` and `out` must hold `n` values; they may alias.
 */
enum BpdmmStatus bpdmm_simplex_projection(const double *v, size_t n, double *out);

/**
 * `B_φ(u, v)`.
 *
 * # Safety
 * `u` and `v` must hold `n` values; `out` must be writable.
 */
enum BpdmmStatus bpdmm_bregman_divergence(enum BpdmmMirror mirror,
                                          const double *u,
                                          const double *v,
                                          size_t n,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BREGMAN_PDMM_H */
