#ifndef MUSKAT_H
#define MUSKAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum MuskatStatus {
  MUSKAT_STATUS_OK = 0,
  MUSKAT_STATUS_NULL_POINTER = 1,
  MUSKAT_STATUS_INVALID_INPUT = 2,
  MUSKAT_STATUS_GRID_MISMATCH = 3,
  MUSKAT_STATUS_NON_FINITE = 4,
  MUSKAT_STATUS_IO = 5,
  MUSKAT_STATUS_OUT_OF_RANGE = 6,
  MUSKAT_STATUS_PANIC = 7,
} MuskatStatus;

typedef enum MuskatScheme {
  MUSKAT_SCHEME_IFRK4 = 0,
  MUSKAT_SCHEME_IF_EULER = 1,
} MuskatScheme;

// Opaque band-limited real field.
typedef struct MuskatField MuskatField;

// Opaque result of a time integration.
typedef struct MuskatTrajectory MuskatTrajectory;

// Norms of one field. Sobolev norms are homogeneous.
typedef struct MuskatNorms {
  double a0;
  double a1;
  double a2;
  double l2;
  double h32;
  double h2;
  double linf;
  double max_f;
  double min_f;
  double linf_dxf;
} MuskatNorms;

// Time-stepping parameters. Fill with [`muskat_solver_params_default`]
// and override as needed.
typedef struct MuskatSolverParams {
  double nu;
  double dt;
  double t_end;
  enum MuskatScheme scheme;
  double blowup_a1_threshold;
  size_t snapshot_stride;
} MuskatSolverParams;

// One row of a trajectory. Dissipation integrals are listed for the
// orders 0, 3/2 and 2.
typedef struct MuskatStep {
  double t;
  double dt;
  struct MuskatNorms norms;
  double diss_gravity[3];
  double diss_capillary[3];
} MuskatStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`) and returns the full message length
// excluding the terminator. Returns 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t muskat_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *muskat_version(void);

// Field with all coefficients zero on modes `|n| <= band_limit`.
//
// # Safety
// `out` must be valid for writes.
enum MuskatStatus muskat_field_zeros(size_t band_limit, struct MuskatField **out);

// Field from its coefficients on modes `1..=count`, `count <= band_limit`;
// higher modes are zero, negative modes follow by conjugate symmetry and
// the mean is zero.
//
// # Safety
// `re` and `im` must be valid for `count` reads; `out` valid for writes.
enum MuskatStatus muskat_field_from_modes(size_t band_limit,
                                          const double *re,
                                          const double *im,
                                          size_t count,
                                          struct MuskatField **out);

// `a cos(m x)` on the given band.
//
// # Safety
// `out` must be valid for writes.
enum MuskatStatus muskat_field_cosine(size_t band_limit,
                                      size_t m,
                                      double a,
                                      struct MuskatField **out);

// Independent copy of a field.
//
// # Safety
// `field` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_field_clone(const struct MuskatField *field, struct MuskatField **out);

// Releases a field. Null is ignored.
//
// # Safety
// `field` must be null or a handle not yet freed.
void muskat_field_free(struct MuskatField *field);

// # Safety
// `field` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_field_band_limit(const struct MuskatField *field, size_t *out);

// Coefficient of mode `n`, zero outside the band.
//
// # Safety
// `field` must be a live handle; `re` and `im` valid for writes.
enum MuskatStatus muskat_field_coeff(const struct MuskatField *field,
                                     int64_t n,
                                     double *re,
                                     double *im);

// Values at the `m > 2 band_limit` equispaced points `x_j = -pi + 2 pi j / m`.
//
// # Safety
// `field` must be a live handle; `values` valid for `m` writes.
enum MuskatStatus muskat_field_sample(const struct MuskatField *field, double *values, size_t m);

// # Safety
// `field` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_field_norms(const struct MuskatField *field, struct MuskatNorms *out);

// Nonlinear part `N(f)` of the right-hand side for the given `nu`.
//
// # Safety
// `field` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_rhs(const struct MuskatField *field, double nu, struct MuskatField **out);

// Defaults: `nu = 0`, `dt = 1e-3`, `t_end = 1`, IFRK4, blow-up threshold
// 10, snapshot every 100 steps.
//
// # Safety
// `out` must be valid for writes.
enum MuskatStatus muskat_solver_params_default(struct MuskatSolverParams *out);

// Integrates from `initial` on its own grid. A run stopped by the blow-up
// threshold or a non-finite value still succeeds; query
// [`muskat_trajectory_completed`].
//
// # Safety
// `initial` must be a live handle, `params` valid for reads and `out`
// valid for writes.
enum MuskatStatus muskat_evolve(const struct MuskatField *initial,
                                const struct MuskatSolverParams *params,
                                struct MuskatTrajectory **out);

// Releases a trajectory. Null is ignored.
//
// # Safety
// `traj` must be null or a handle not yet freed.
void muskat_trajectory_free(struct MuskatTrajectory *traj);

// Number of recorded steps, including the initial row.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_trajectory_len(const struct MuskatTrajectory *traj, size_t *out);

// Writes 1 if the run reached `t_end`, 0 if it was stopped early.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_trajectory_completed(const struct MuskatTrajectory *traj, int32_t *out);

// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_trajectory_step(const struct MuskatTrajectory *traj,
                                         size_t index,
                                         struct MuskatStep *out);

// Copy of the last stored state.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum MuskatStatus muskat_trajectory_final_field(const struct MuskatTrajectory *traj,
                                                struct MuskatField **out);

// Writes the trajectory table as CSV to the UTF-8 path `path`.
//
// # Safety
// `traj` must be a live handle and `path` a NUL-terminated string.
enum MuskatStatus muskat_trajectory_write_csv(const struct MuskatTrajectory *traj,
                                              const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUSKAT_H */
