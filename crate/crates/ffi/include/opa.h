#ifndef OPA_H
#define OPA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum OpaStatus {
  OPA_STATUS_OK = 0,
  OPA_STATUS_NULL_POINTER = 1,
  OPA_STATUS_ARGUMENT = 2,
  OPA_STATUS_PARSE = 3,
  OPA_STATUS_ADMISSIBILITY = 4,
  OPA_STATUS_UNSUPPORTED_EXPONENT = 5,
  OPA_STATUS_INAPPLICABLE = 6,
  OPA_STATUS_N_TOO_SMALL = 7,
  OPA_STATUS_INEXACT_DIVISION = 8,
  OPA_STATUS_ILL_CONDITIONED = 9,
  OPA_STATUS_NOT_CONVERGED = 10,
  OPA_STATUS_INTERNAL = 11,
  OPA_STATUS_BUFFER_TOO_SMALL = 12,
  OPA_STATUS_PANIC = 13,
} OpaStatus;

typedef enum OpaTail {
  OPA_TAIL_CONSTANT = 0,
  OPA_TAIL_POWER = 1,
} OpaTail;

/*
 Solver selection for `opa_solve`.
 */
typedef enum OpaSolver {
  /*
   Closed form for `c (1 - z^d)`, flat solver at `p = 1, inf`, Hilbert
   solve at `p = 2`, convex solver otherwise.
   */
  OPA_SOLVER_AUTO = 0,
  OPA_SOLVER_CONVEX = 1,
  OPA_SOLVER_HILBERT = 2,
  OPA_SOLVER_STRUCTURAL = 3,
  OPA_SOLVER_FLAT = 4,
  OPA_SOLVER_CLOSED = 5,
  OPA_SOLVER_COMPOSITE = 6,
} OpaSolver;

typedef enum OpaRegime {
  OPA_REGIME_POWER_DECAY = 0,
  OPA_REGIME_LOG_DECAY = 1,
  OPA_REGIME_STAGNATION = 2,
} OpaRegime;

/*
 Opaque polynomial, remembering its circle zeros when built from them.
 */
typedef struct OpaPoly OpaPoly;

/*
 Opaque solve result.
 */
typedef struct OpaResult OpaResult;

/*
 Opaque weight sequence.
 */
typedef struct OpaWeight OpaWeight;

/*
 Solver options; obtain defaults from `opa_solver_options_default`.
 */
typedef struct OpaSolverOptions {
  double grad_tol;
  size_t max_iters;
  double flat_tol;
  double system_tol;
  double step_tol;
  bool warm_start;
} OpaSolverOptions;

/*
 Decay prediction for a power weight, describing `||1 - p_n f||^p` for
 finite `p` and the norm itself at `p = inf`. `exponent` is the power of
 `n + d + 1` under `PowerDecay`, the power of `log(n + d + 2)` under
 `LogDecay`, and `0` under `Stagnation`.
 */
typedef struct OpaRatePrediction {
  enum OpaRegime regime;
  double exponent;
  bool cyclic;
} OpaRatePrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message on this thread into `buf` (capacity
 `cap`, NUL-terminated, truncated if needed) and returns the full message
 length excluding the terminator. `buf` may be null to query the length.
 */
size_t opa_last_error_message(char *buf, size_t cap);

/*
 Library version as a static NUL-terminated string.
 */
const char *opa_version(void);

struct OpaSolverOptions opa_solver_options_default(void);

/*
 Power weight `w_k = (k+1)^alpha`.
 */
enum OpaStatus opa_weight_power(double alpha, struct OpaWeight **out);

/*
 Tabulated weight `values[0..len]` (with `values[0] = 1`), extended past
 the table by `tail`.
 */
enum OpaStatus opa_weight_table(const double *values,
                                size_t len,
                                enum OpaTail tail,
                                struct OpaWeight **out);

enum OpaStatus opa_weight_at(const struct OpaWeight *w, size_t k, double *out);

enum OpaStatus opa_weight_doubling_constant(const struct OpaWeight *w, double *out);

void opa_weight_free(struct OpaWeight *w);

/*
 Polynomial with coefficients `re[k] + i im[k]`, `k < len`, lowest degree
 first. `im` may be null for real coefficients.
 */
enum OpaStatus opa_poly_from_coeffs(const double *re,
                                    const double *im,
                                    size_t len,
                                    struct OpaPoly **out);

/*
 Polynomial from zeros on the unit circle, written `angle:mult,...`
 (angles such as `0`, `pi/2`, `3pi/4`), scaled so that `f(0) = 1`.
 */
enum OpaStatus opa_poly_from_roots(const char *roots, struct OpaPoly **out);

/*
 Degree of `poly`, or `-1` for the zero polynomial.
 */
enum OpaStatus opa_poly_degree(const struct OpaPoly *poly, int64_t *out);

enum OpaStatus opa_poly_coeffs(const struct OpaPoly *poly,
                               double *re,
                               double *im,
                               size_t cap,
                               size_t *len);

void opa_poly_free(struct OpaPoly *poly);

/*
 Optimal approximant of degree `n` to `1/f` in `l^p_A(w)`.

 `opts` may be null for defaults. A result that did not reach its
 tolerance is still returned, with `opa_result_converged` false.
 */
enum OpaStatus opa_solve(const struct OpaPoly *f,
                         size_t n,
                         double p,
                         const struct OpaWeight *w,
                         enum OpaSolver solver,
                         const struct OpaSolverOptions *opts,
                         struct OpaResult **out);

/*
 Closed-form approximant of degree `n` to `1/(1 - z^d)` for `1 < p < inf`.
 */
enum OpaStatus opa_closed_form(size_t d,
                               size_t n,
                               double p,
                               const struct OpaWeight *w,
                               struct OpaResult **out);

/*
 `(sum_{t<=n+d} w_t^{-q/p})^{-1/q}`, a lower bound for every
 `||1 - P f||` with `deg P <= n`, when `f` vanishes on the unit circle.
 */
enum OpaStatus opa_lower_bound(const struct OpaPoly *f,
                               size_t n,
                               double p,
                               const struct OpaWeight *w,
                               double *out);

/*
 Decay regime and cyclicity for the power weight `(k+1)^alpha`.
 */
enum OpaStatus opa_classify(double p, double alpha, struct OpaRatePrediction *out);

enum OpaStatus opa_result_optimal_norm(const struct OpaResult *r, double *out);

enum OpaStatus opa_result_converged(const struct OpaResult *r, bool *out);

enum OpaStatus opa_result_iterations(const struct OpaResult *r, size_t *out);

/*
 Largest normalized orthogonality residual, or NaN at `p = 1, inf`.
 */
enum OpaStatus opa_result_ortho_residual_max(const struct OpaResult *r, double *out);

/*
 Coefficients of the approximant `p_n`; buffer protocol as in
 `opa_poly_coeffs`.
 */
enum OpaStatus opa_result_approximant(const struct OpaResult *r,
                                      double *re,
                                      double *im,
                                      size_t cap,
                                      size_t *len);

/*
 Coefficients of the residual `1 - p_n f`.
 */
enum OpaStatus opa_result_residual(const struct OpaResult *r,
                                   double *re,
                                   double *im,
                                   size_t cap,
                                   size_t *len);

void opa_result_free(struct OpaResult *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPA_H */
