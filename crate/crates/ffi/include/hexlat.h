#ifndef HEXLAT_H
#define HEXLAT_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HexlatStatus {
  HEXLAT_STATUS_OK = 0,
  HEXLAT_STATUS_NULL_POINTER = 1,
  HEXLAT_STATUS_DOMAIN = 2,
  HEXLAT_STATUS_REDUCTION_FAILED = 3,
  HEXLAT_STATUS_PARTITION = 4,
  HEXLAT_STATUS_SINGULARITY = 5,
  HEXLAT_STATUS_KERNEL_SPEC = 6,
  HEXLAT_STATUS_PRECONDITION = 7,
  HEXLAT_STATUS_OUT_OF_RANGE = 8,
  HEXLAT_STATUS_INVALID_UTF8 = 9,
  HEXLAT_STATUS_PANIC = 10,
  HEXLAT_STATUS_OTHER = 11,
} HexlatStatus;

/**
 * Energy profile for the triple energy functions.
 */
typedef enum HexlatProfile {
  HEXLAT_PROFILE_SQUARED = 0,
  HEXLAT_PROFILE_LINEAR = 1,
} HexlatProfile;

/**
 * Radial kernel from [`hexlat_kernel_parse`].
 */
typedef struct HexlatKernel HexlatKernel;

/**
 * Shell table from [`hexlat_shells_enumerate`].
 */
typedef struct HexlatShells HexlatShells;

typedef struct HexlatBasis {
  double v1[2];
  double w1[2];
  double x;
  double y;
} HexlatBasis;

typedef struct HexlatMatrix {
  int64_t a;
  int64_t b;
  int64_t c;
  int64_t d;
} HexlatMatrix;

/**
 * `[[h1, h2], [h2, h3]]` with its eigenvalues.
 */
typedef struct HexlatHessian {
  double h1;
  double h2;
  double h3;
  double lambda_min;
  double lambda_max;
} HexlatHessian;

typedef struct HexlatMinimum {
  double argmin[2];
  /**
   * Argmin in cell coordinates.
   */
  double cell[2];
  double value;
  double grid_resolution;
} HexlatMinimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *hexlat_last_error(void);

/**
 * Static name of a status code.
 */
const char *hexlat_status_name(enum HexlatStatus status);

/**
 * # Safety
 * `out` must be null or point to a writable `HexlatBasis`.
 */
enum HexlatStatus hexlat_basis_from_params(double x, double y, struct HexlatBasis *out);

/**
 * # Safety
 * `out` must be null or point to a writable `HexlatBasis`.
 */
enum HexlatStatus hexlat_hex_basis(struct HexlatBasis *out);

/**
 * Writes the deep hole `p` to `out[0..2]`.
 *
 * # Safety
 * `out` must be null or point to two writable doubles.
 */
enum HexlatStatus hexlat_deep_hole(double *out);

/**
 * Reduces `x + iy` to the fundamental domain. `matrix` receives the
 * canonical element that maps the reduced point back to the input.
 *
 * # Safety
 * Each out-pointer must be null or writable; `out_x`, `out_y` are required.
 */
enum HexlatStatus hexlat_reduce(double x,
                                double y,
                                double *out_x,
                                double *out_y,
                                struct HexlatMatrix *matrix);

/**
 * # Safety
 * `out` must be null or point to a writable double.
 */
enum HexlatStatus hexlat_lattice_distance(double x1, double y1, double x2, double y2, double *out);

/**
 * Triple energy at real index `(k, l)` and parameters `(x, y)`.
 *
 * # Safety
 * `out` must be null or point to a writable double.
 */
enum HexlatStatus hexlat_triple_energy(enum HexlatProfile profile,
                                       double k,
                                       double l,
                                       double x,
                                       double y,
                                       double *out);

/**
 * Central-difference gradient written to `out[0..2]`.
 *
 * # Safety
 * `out` must be null or point to two writable doubles.
 */
enum HexlatStatus hexlat_triple_gradient(enum HexlatProfile profile,
                                         double k,
                                         double l,
                                         double x,
                                         double y,
                                         double step,
                                         double *out);

/**
 * Exact Hessian of the squared triple energy at the hexagonal point.
 * `q` (may be null) receives `k^2 + kl + l^2 - k - l`.
 *
 * # Safety
 * `out` must be null or writable; `q` may be null.
 */
enum HexlatStatus hexlat_hessian_squared_closed_form(int64_t k,
                                                     int64_t l,
                                                     struct HexlatHessian *out,
                                                     int64_t *q);

/**
 * Finite-difference Hessian at `(x, y)`.
 *
 * # Safety
 * `out` must be null or point to a writable `HexlatHessian`.
 */
enum HexlatStatus hexlat_hessian_numeric(enum HexlatProfile profile,
                                         double k,
                                         double l,
                                         double x,
                                         double y,
                                         double step,
                                         struct HexlatHessian *out);

/**
 * Hexagonal shells with radius at most `r_max`.
 *
 * # Safety
 * `out` must be null or point to a writable handle pointer. The handle
 * is released with [`hexlat_shells_free`].
 */
enum HexlatStatus hexlat_shells_enumerate(double r_max, struct HexlatShells **out);

/**
 * Number of shells, or 0 for a null handle.
 *
 * # Safety
 * `shells` must be null or a live handle.
 */
size_t hexlat_shells_count(const struct HexlatShells *shells);

/**
 * Radius and member count of shell `index`.
 *
 * # Safety
 * `shells` must be a live handle; out-pointers must be null or writable.
 */
enum HexlatStatus hexlat_shells_info(const struct HexlatShells *shells,
                                     size_t index,
                                     double *radius,
                                     size_t *size);

/**
 * Member `member` of shell `index`; members of one rotation triple are
 * adjacent and `triple` receives the triple's position in the shell.
 *
 * # Safety
 * `shells` must be a live handle; `k`, `l` must be writable, `triple` may be null.
 */
enum HexlatStatus hexlat_shells_member(const struct HexlatShells *shells,
                                       size_t index,
                                       size_t member,
                                       int64_t *k,
                                       int64_t *l,
                                       size_t *triple);

/**
 * # Safety
 * `shells` must be null or a handle not yet freed.
 */
void hexlat_shells_free(struct HexlatShells *shells);

/**
 * Parses a kernel spec such as `default` or `gauss:rate=2,c=1.5`.
 *
 * # Safety
 * `spec` must be null or a NUL-terminated string; `out` must be null or
 * writable. The handle is released with [`hexlat_kernel_free`].
 */
enum HexlatStatus hexlat_kernel_parse(const char *spec, struct HexlatKernel **out);

/**
 * Writes `f(r), f'(r), f''(r)` to `out[0..3]`.
 *
 * # Safety
 * `kernel` must be a live handle; `out` must point to three writable doubles.
 */
enum HexlatStatus hexlat_kernel_eval(const struct HexlatKernel *kernel, double r, double *out);

/**
 * Support radius; infinite for non-compact kernels, NaN for a null handle.
 *
 * # Safety
 * `kernel` must be null or a live handle.
 */
double hexlat_kernel_support(const struct HexlatKernel *kernel);

/**
 * # Safety
 * `kernel` must be null or a handle not yet freed.
 */
void hexlat_kernel_free(struct HexlatKernel *kernel);

/**
 * Admissibility against the kernel's own constants. `violated` receives
 * the failed condition number, or 0 when `passed` is true.
 *
 * # Safety
 * `kernel` must be a live handle; `passed` must be writable, `violated` may be null.
 */
enum HexlatStatus hexlat_kernel_admissible(const struct HexlatKernel *kernel,
                                           bool *passed,
                                           uint8_t *violated);

/**
 * Lattice sum of the kernel over the lattice `(x, y)` shifted by `z`.
 *
 * # Safety
 * `kernel` must be a live handle; `z` must point to two doubles; `out` must be writable.
 */
enum HexlatStatus hexlat_lattice_sum(const struct HexlatKernel *kernel,
                                     double x,
                                     double y,
                                     const double *z,
                                     double *out);

/**
 * Minimum of the lattice sum over one fundamental cell.
 *
 * # Safety
 * `kernel` must be a live handle; `out` must be writable.
 */
enum HexlatStatus hexlat_minimize(const struct HexlatKernel *kernel,
                                  double x,
                                  double y,
                                  size_t coarse_n,
                                  size_t refine_iters,
                                  struct HexlatMinimum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEXLAT_H */
