#ifndef POSSDRO_H
#define POSSDRO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C API.
 */
typedef enum PossdroError {
  POSSDRO_ERROR_OK = 0,
  POSSDRO_ERROR_NULL_POINTER = 1,
  POSSDRO_ERROR_INVALID_UTF8 = 2,
  /**
   * The document failed to parse or validate.
   */
  POSSDRO_ERROR_PARSE = 3,
  /**
   * The document parsed but the model could not be assembled.
   */
  POSSDRO_ERROR_MODEL = 4,
  /**
   * Bad solver settings.
   */
  POSSDRO_ERROR_CONFIG = 5,
  /**
   * The output buffer is too small.
   */
  POSSDRO_ERROR_BUFFER = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  POSSDRO_ERROR_INTERNAL = 7,
} PossdroError;

/**
 * Solve outcome.
 */
typedef enum PossdroStatus {
  POSSDRO_STATUS_OPTIMAL = 0,
  POSSDRO_STATUS_INFEASIBLE = 1,
  POSSDRO_STATUS_UNBOUNDED = 2,
  POSSDRO_STATUS_ITERATION_LIMIT = 3,
} PossdroStatus;

/**
 * Assembled model.
 */
typedef struct PossdroModel PossdroModel;

/**
 * Result of a solve.
 */
typedef struct PossdroSolution PossdroSolution;

/**
 * Solver settings passed by value.
 */
typedef struct PossdroSolverConfig {
  double feas_tol;
  double cone_tol;
  uint64_t max_pivots;
  uint64_t max_cuts_per_cone;
} PossdroSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next API call on this thread.
 */
const char *possdro_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *possdro_version(void);

/**
 * Default solver settings.
 */
struct PossdroSolverConfig possdro_solver_config_default(void);

/**
 * Parses a JSON model document and assembles it. On success `*out`
 * receives a handle to release with [`possdro_model_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PossdroError possdro_model_from_json(const char *json, struct PossdroModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`possdro_model_from_json`] and not be used
 * afterwards.
 */
void possdro_model_free(struct PossdroModel *model);

/**
 * Number of decision variables.
 *
 * # Safety
 * `model` must be a live handle or null (which yields 0).
 */
size_t possdro_model_dimension(const struct PossdroModel *model);

/**
 * Solves a model. On success `*out` receives a handle to release with
 * [`possdro_solution_free`]; non-optimal outcomes are reported through
 * the solution status, not the return code.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum PossdroError possdro_model_solve(const struct PossdroModel *model,
                                      struct PossdroSolverConfig config,
                                      struct PossdroSolution **out);

/**
 * Writes the LP-style listing of the assembled model into `*out`, to be
 * released with [`possdro_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum PossdroError possdro_model_export_text(const struct PossdroModel *model, char **out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void possdro_string_free(char *s);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `sol` must come from [`possdro_model_solve`] and not be used afterwards.
 */
void possdro_solution_free(struct PossdroSolution *sol);

/**
 * # Safety
 * `sol` must be a live handle.
 */
enum PossdroStatus possdro_solution_status(const struct PossdroSolution *sol);

/**
 * Objective value; NaN for a null handle.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
double possdro_solution_objective(const struct PossdroSolution *sol);

/**
 * Simplex pivots and cuts spent.
 *
 * # Safety
 * `sol` must be a live handle; the outputs may be null.
 */
enum PossdroError possdro_solution_counts(const struct PossdroSolution *sol,
                                          uint64_t *iterations,
                                          uint64_t *cuts);

/**
 * Copies the decision vector into `buf`, which must hold `len >=
 * dimension` values.
 *
 * # Safety
 * `sol` must be a live handle and `buf` valid for `len` writes.
 */
enum PossdroError possdro_solution_x(const struct PossdroSolution *sol, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSSDRO_H */
