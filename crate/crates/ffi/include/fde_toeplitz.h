#ifndef FDE_TOEPLITZ_H
#define FDE_TOEPLITZ_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FdeStatus {
  FDE_STATUS_OK = 0,
  FDE_STATUS_NULL_POINTER = 1,
  FDE_STATUS_INVALID_ARGUMENT = 2,
  FDE_STATUS_LENGTH_MISMATCH = 3,
  FDE_STATUS_NOT_SPD = 4,
  FDE_STATUS_NOT_CONVERGED = 5,
  FDE_STATUS_NUMERICAL = 6,
  FDE_STATUS_PANIC = 7,
} FdeStatus;

/**
 * Preconditioner selector; pass the integer value.
 */
typedef enum FdePrecKind {
  FDE_PREC_KIND_IDENTITY = 0,
  FDE_PREC_KIND_STRANG_CIRCULANT = 1,
  FDE_PREC_KIND_FROBENIUS_CIRCULANT = 2,
  FDE_PREC_KIND_NATURAL_TAU = 3,
  FDE_PREC_KIND_FROBENIUS_TAU = 4,
  FDE_PREC_KIND_LAPLACIAN = 5,
} FdePrecKind;

/**
 * Multigrid smoother configuration; pass the integer value.
 */
typedef enum FdeMgmCase {
  FDE_MGM_CASE_ALPHA = 0,
  FDE_MGM_CASE_BETA = 1,
  FDE_MGM_CASE_GAMMA = 2,
  FDE_MGM_CASE_DELTA = 3,
  FDE_MGM_CASE_FINEST_ONLY = 4,
} FdeMgmCase;

typedef struct FdePreconditioner FdePreconditioner;

typedef struct FdeSolveReport FdeSolveReport;

/**
 * Symmetric Toeplitz matrix with a fast product.
 */
typedef struct FdeToeplitz FdeToeplitz;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fde_last_error_message(void);

/**
 * Static, NUL-terminated crate version.
 */
const char *fde_version(void);

/**
 * `f_n(θ)` for `n ≥ 2`, `|θ| ≤ π`.
 *
 * # Safety
 * `out` must be a valid pointer to one `double`.
 */
enum FdeStatus fde_eval_fn(size_t n, double theta, double *out);

/**
 * The bound constants `k1`, `k2`, `c_infinity` to absolute tolerance `tol`.
 *
 * # Safety
 * Each output must be a valid pointer to one `double`.
 */
enum FdeStatus fde_bound_constants(double tol, double *k1, double *k2, double *c_infinity);

/**
 * `n λ₁(A_n)` from the dense eigensolver.
 *
 * # Safety
 * `out` must be a valid pointer to one `double`.
 */
enum FdeStatus fde_min_eig_normalized(size_t n, double *out);

/**
 * Builds `A_n`, or `A_n / n` when `scaled` is nonzero.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FdeStatus fde_toeplitz_new_fn(size_t n, int32_t scaled, struct FdeToeplitz **out);

/**
 * Builds a Toeplitz matrix from its first column.
 *
 * # Safety
 * `coeffs` must point to `len` doubles; `out` to a handle slot.
 */
enum FdeStatus fde_toeplitz_from_coeffs(const double *coeffs, size_t len, struct FdeToeplitz **out);

/**
 * # Safety
 * `h` must be null or a handle from this library, not yet freed.
 */
void fde_toeplitz_free(struct FdeToeplitz *h);

/**
 * Matrix order, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t fde_toeplitz_order(const struct FdeToeplitz *h);

/**
 * Copies the first column into `out[0..len]`; `len` must equal the order.
 *
 * # Safety
 * `h` must be a live handle and `out` must point to `len` doubles.
 */
enum FdeStatus fde_toeplitz_coeffs(const struct FdeToeplitz *h, double *out, size_t len);

/**
 * `y = T x`.
 *
 * # Safety
 * `h` must be a live handle; `x` and `y` must point to `len` doubles.
 */
enum FdeStatus fde_toeplitz_matvec(const struct FdeToeplitz *h,
                                   const double *x,
                                   double *y,
                                   size_t len);

/**
 * Builds a preconditioner of kind `kind` (an [`FdePrecKind`] value) for `t`.
 *
 * # Safety
 * `t` must be a live handle; `out` must point to a handle slot.
 */
enum FdeStatus fde_preconditioner_new(const struct FdeToeplitz *t,
                                      uint32_t kind,
                                      struct FdePreconditioner **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void fde_preconditioner_free(struct FdePreconditioner *p);

/**
 * `y = P⁻¹ x`.
 *
 * # Safety
 * `p` must be a live handle; `x` and `y` must point to `len` doubles.
 */
enum FdeStatus fde_preconditioner_apply_inverse(const struct FdePreconditioner *p,
                                                const double *x,
                                                double *y,
                                                size_t len);

/**
 * PCG on `T x = b` from `x0 = 0`. `p` may be null for plain CG;
 * `max_iterations == 0` means `10 n`. On `NotConverged` the report is still
 * stored and must be freed.
 *
 * # Safety
 * `t` must be a live handle, `p` null or a live handle of the same order,
 * `b` must point to `len` doubles and `out` to a handle slot.
 */
enum FdeStatus fde_pcg_solve(const struct FdeToeplitz *t,
                             const struct FdePreconditioner *p,
                             const double *b,
                             size_t len,
                             double tol,
                             size_t max_iterations,
                             struct FdeSolveReport **out);

/**
 * V-cycle multigrid on `T x = b` (order `2^k - 1`) with a dense Galerkin
 * hierarchy; `mgm_case` is an [`FdeMgmCase`] value.
 *
 * # Safety
 * As for [`fde_pcg_solve`].
 */
enum FdeStatus fde_mgm_solve(const struct FdeToeplitz *t,
                             uint32_t mgm_case,
                             const double *b,
                             size_t len,
                             double tol,
                             struct FdeSolveReport **out);

/**
 * # Safety
 * `r` must be null or a handle from this library, not yet freed.
 */
void fde_solve_report_free(struct FdeSolveReport *r);

/**
 * Iteration count, 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t fde_solve_report_iterations(const struct FdeSolveReport *r);

/**
 * 1 if converged, 0 otherwise or for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t fde_solve_report_converged(const struct FdeSolveReport *r);

/**
 * Length of the residual history (iterations + 1), 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t fde_solve_report_history_len(const struct FdeSolveReport *r);

/**
 * Copies the scaled-residual history; `len` must equal
 * [`fde_solve_report_history_len`].
 *
 * # Safety
 * `r` must be a live handle and `out` must point to `len` doubles.
 */
enum FdeStatus fde_solve_report_history(const struct FdeSolveReport *r, double *out, size_t len);

/**
 * Copies the solution; `len` must equal the system order.
 *
 * # Safety
 * `r` must be a live handle and `out` must point to `len` doubles.
 */
enum FdeStatus fde_solve_report_solution(const struct FdeSolveReport *r, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDE_TOEPLITZ_H */
