#ifndef FRACSERIES_H
#define FRACSERIES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_ARGUMENT = 2,
  FS_STATUS_DOMAIN = 3,
  FS_STATUS_POLE = 4,
  FS_STATUS_UNSUPPORTED = 5,
  FS_STATUS_NON_CONVERGENCE = 6,
  FS_STATUS_OVERFLOW = 7,
  FS_STATUS_SINGULAR_COEFFICIENT = 8,
  FS_STATUS_BRACKET_FAILURE = 9,
  // A Rust panic was caught at the boundary.
  FS_STATUS_INTERNAL = 10,
} FsStatus;

typedef enum FsDefinition {
  FS_DEFINITION_GRUNWALD_LETNIKOV = 0,
  FS_DEFINITION_RIEMANN_LIOUVILLE = 1,
  FS_DEFINITION_CAPUTO = 2,
} FsDefinition;

typedef enum FsFdeKind {
  FS_FDE_KIND_CONSTANT = 0,
  FS_FDE_KIND_VARIABLE = 1,
} FsFdeKind;

// Truncated series configuration bound to one catalog function.
typedef struct FsExpansion FsExpansion;

// Numeric solution and exact reference on a grid.
typedef struct FsReport FsReport;

// Integration settings for [`fs_fde_solve`]; see [`fs_solve_config_default`].
typedef struct FsSolveConfig {
  double eps;
  double x_max;
  size_t steps;
  double bracket_lo;
  double bracket_hi;
} FsSolveConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `len` bytes, into `buf`. Returns the full message length
// excluding the terminator, so a too-small buffer can be detected.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t fs_last_error_message(char *buf, size_t len);

// Static, NUL-terminated library version.
const char *fs_version(void);

// # Safety
// `out` must be null or valid for a write.
enum FsStatus fs_gamma(double z, double *out);

// 1/Γ(z); total, zero at the poles.
double fs_recip_gamma(double z);

// # Safety
// `out` must be null or valid for a write.
enum FsStatus fs_mittag_leffler(double alpha, double beta, double z, double *out);

// ₀Ψ₁[-; (1/2, -1/2)](z).
//
// # Safety
// `out` must be null or valid for a write.
enum FsStatus fs_fox_wright_gaussian(double z, double *out);

// Creates an expansion for the catalog function named by `function`
// (`sech`, `tanh`, `sin`, `cos`, `gaussian`, `exp`, `power:<p>`,
// `constant:<c>`).
//
// # Safety
// `function` must be null or a NUL-terminated string; `out` must be null
// or valid for a write.
enum FsStatus fs_expansion_new(const char *function,
                               enum FsDefinition definition,
                               double q,
                               double base,
                               size_t n_terms,
                               struct FsExpansion **out);

// Number of terms, equal to `n_terms` at creation; 0 for null.
//
// # Safety
// `e` must be null or a live handle from [`fs_expansion_new`].
size_t fs_expansion_terms(const struct FsExpansion *e);

// # Safety
// `e` must be null or a live handle; `out` must be null or valid for a
// write.
enum FsStatus fs_expansion_eval(const struct FsExpansion *e, double x, double *out);

// Evaluates at `x` and writes the per-term weights and contributions.
// Either array may be null; non-null arrays need `len >=` the term count.
//
// # Safety
// `e` must be null or a live handle; `value` must be null or valid for a
// write; `weights` and `contributions` must be null or hold `len` doubles.
enum FsStatus fs_expansion_eval_terms(const struct FsExpansion *e,
                                      double x,
                                      double *value,
                                      double *weights,
                                      double *contributions,
                                      size_t len);

// # Safety
// `e` must be null or a handle from [`fs_expansion_new`] not yet freed.
void fs_expansion_free(struct FsExpansion *e);

struct FsSolveConfig fs_solve_config_default(void);

// Solves the truncated FDE (q = 1/2, three terms) and compares it with
// the exact solution at the `n` points of `grid`. A null `config` means
// [`fs_solve_config_default`].
//
// # Safety
// `grid` must hold `n` doubles; `config` must be null or valid; `out`
// must be null or valid for a write.
enum FsStatus fs_fde_solve(enum FsFdeKind kind,
                           double lambda,
                           const double *grid,
                           size_t n,
                           const struct FsSolveConfig *config,
                           struct FsReport **out);

// Grid length; 0 for null.
//
// # Safety
// `r` must be null or a live handle from [`fs_fde_solve`].
size_t fs_report_len(const struct FsReport *r);

// Row `i`: grid point, numeric solution, exact solution, relative error.
// Any out pointer may be null.
//
// # Safety
// `r` must be null or a live handle; non-null out pointers must be valid
// for a write.
enum FsStatus fs_report_row(const struct FsReport *r,
                            size_t i,
                            double *x,
                            double *numeric,
                            double *exact,
                            double *rel_error);

// Largest |relative error| over the grid; NaN for null.
//
// # Safety
// `r` must be null or a live handle.
double fs_report_max_error(const struct FsReport *r);

// # Safety
// `r` must be null or a handle from [`fs_fde_solve`] not yet freed.
void fs_report_free(struct FsReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSERIES_H */
