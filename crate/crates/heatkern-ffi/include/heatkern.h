#ifndef HEATKERN_H
#define HEATKERN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum HkStatus {
  HkStatus_Ok = 0,
  HkStatus_NullPointer = 1,
  HkStatus_InvalidArgument = 2,
  HkStatus_CutPair = 3,
  HkStatus_NonpositiveTime = 4,
  HkStatus_ResolutionTooSmall = 5,
  HkStatus_OrderUnsupported = 6,
  HkStatus_TruncationNotConverged = 7,
  HkStatus_GridMismatch = 8,
  HkStatus_QuadratureNotConverged = 9,
  HkStatus_DimensionTooLarge = 10,
  HkStatus_DegenerateHessian = 11,
  HkStatus_NegativeEigenvalue = 12,
  HkStatus_PartitionTooCoarse = 13,
  HkStatus_BadTimeOrder = 14,
  HkStatus_InsufficientPoints = 15,
  HkStatus_OperatorModelMismatch = 16,
  HkStatus_OracleMismatch = 17,
  HkStatus_IoError = 18,
  HkStatus_InternalError = 19,
} HkStatus;

/**
 * Opaque quadrature-grid handle.
 */
typedef struct HkGrid HkGrid;

/**
 * Opaque kernel-matrix handle.
 */
typedef struct HkKernel HkKernel;

/**
 * Opaque model-manifold handle.
 */
typedef struct HkManifold HkManifold;

/**
 * Opaque operator handle.
 */
typedef struct HkOperator HkOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message into `buf` (truncated, always NUL-terminated
 * when cap > 0). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be null with cap 0.
 */
uintptr_t hk_last_error_message(char *buf, uintptr_t cap);

/**
 * # Safety
 * `out` must be a valid pointer to a pointer slot.
 */
enum HkStatus hk_manifold_circle(double radius, struct HkManifold **out);

/**
 * # Safety
 * `out` must be a valid pointer to a pointer slot.
 */
enum HkStatus hk_manifold_torus(double l1, double l2, struct HkManifold **out);

/**
 * # Safety
 * `out` must be a valid pointer to a pointer slot.
 */
enum HkStatus hk_manifold_sphere(double radius, struct HkManifold **out);

/**
 * # Safety
 * `m` must come from an hk_manifold_* constructor (or be null).
 */
void hk_manifold_free(struct HkManifold *m);

/**
 * # Safety
 * All pointers must be valid or null.
 */
enum HkStatus hk_manifold_constants(const struct HkManifold *m,
                                    uintptr_t *dim,
                                    double *inj,
                                    double *diam,
                                    double *vol);

/**
 * # Safety
 * `m` and `out` must be valid.
 */
enum HkStatus hk_distance(const struct HkManifold *m,
                          double x0,
                          double x1,
                          double y0,
                          double y1,
                          double *out);

/**
 * # Safety
 * `m` and `out` must be valid.
 */
enum HkStatus hk_van_vleck_theta(const struct HkManifold *m,
                                 double x0,
                                 double x1,
                                 double y0,
                                 double y1,
                                 double *out);

/**
 * # Safety
 * `out` must be a valid pointer to a pointer slot.
 */
enum HkStatus hk_operator_laplace(struct HkOperator **out);

/**
 * Schroedinger operator on the circle with a trig-polynomial potential
 * `a0 + sum_k cos_coeffs[k] cos((k+1) theta) + sin_coeffs[k] sin((k+1) theta)`.
 *
 * # Safety
 * Coefficient pointers must point to arrays of the stated lengths (or be
 * null with length 0).
 */
enum HkStatus hk_operator_schroedinger(double a0,
                                       const double *cos_coeffs,
                                       uintptr_t n_cos,
                                       const double *sin_coeffs,
                                       uintptr_t n_sin,
                                       struct HkOperator **out);

/**
 * # Safety
 * `op` must come from an hk_operator_* constructor (or be null).
 */
void hk_operator_free(struct HkOperator *op);

/**
 * # Safety
 * `m` and `out` must be valid.
 */
enum HkStatus hk_grid_build(const struct HkManifold *m, uintptr_t resolution, struct HkGrid **out);

/**
 * # Safety
 * `g` must come from hk_grid_build (or be null).
 */
void hk_grid_free(struct HkGrid *g);

/**
 * # Safety
 * `g` must be valid; returns 0 for null.
 */
uintptr_t hk_grid_size(const struct HkGrid *g);

/**
 * # Safety
 * All pointers must be valid or null.
 */
enum HkStatus hk_grid_node(const struct HkGrid *g,
                           uintptr_t index,
                           double *c0,
                           double *c1,
                           double *weight);

/**
 * # Safety
 * `m` and `out` must be valid.
 */
enum HkStatus hk_euclidean_kernel(const struct HkManifold *m,
                                  double t,
                                  double x0,
                                  double x1,
                                  double y0,
                                  double y1,
                                  double *out);

/**
 * # Safety
 * Handles and `out` must be valid.
 */
enum HkStatus hk_heat_coefficient(const struct HkManifold *m,
                                  const struct HkOperator *op,
                                  uintptr_t order,
                                  double x0,
                                  double x1,
                                  double y0,
                                  double y1,
                                  double *out);

/**
 * Approximate kernel with the model's default cutoff profile.
 *
 * # Safety
 * Handles and `out` must be valid.
 */
enum HkStatus hk_approximate_kernel(const struct HkManifold *m,
                                    const struct HkOperator *op,
                                    uintptr_t nu,
                                    double t,
                                    double x0,
                                    double x1,
                                    double y0,
                                    double y1,
                                    double *out);

/**
 * # Safety
 * Handles and `out` must be valid.
 */
enum HkStatus hk_expansion_remainder(const struct HkManifold *m,
                                     const struct HkOperator *op,
                                     uintptr_t nu,
                                     double t,
                                     double x0,
                                     double x1,
                                     double y0,
                                     double y1,
                                     double *out);

/**
 * # Safety
 * Handles and `out` must be valid.
 */
enum HkStatus hk_reference_kernel(const struct HkManifold *m,
                                  const struct HkOperator *op,
                                  double t,
                                  const struct HkGrid *g,
                                  struct HkKernel **out);

/**
 * # Safety
 * `k` must come from a kernel-producing call (or be null).
 */
void hk_kernel_free(struct HkKernel *k);

/**
 * # Safety
 * `k` must be valid; returns 0 for null.
 */
uintptr_t hk_kernel_size(const struct HkKernel *k);

/**
 * # Safety
 * `k` and `out` must be valid.
 */
enum HkStatus hk_kernel_get(const struct HkKernel *k, uintptr_t row, uintptr_t col, double *out);

/**
 * Write the kernel matrix in the CSV disk format.
 *
 * # Safety
 * `k` must be valid and `path` a NUL-terminated UTF-8 string.
 */
enum HkStatus hk_kernel_write_csv(const struct HkKernel *k, const char *path);

/**
 * # Safety
 * Handles and `out` must be valid.
 */
enum HkStatus hk_convolve(const struct HkKernel *a,
                          const struct HkKernel *b,
                          const struct HkGrid *g,
                          struct HkKernel **out);

/**
 * Repeated convolution of approximate kernels over an equidistant
 * partition of [0, t] with `steps` increments, default cutoff profile.
 *
 * # Safety
 * Handles and `out` must be valid.
 */
enum HkStatus hk_convolution_product(const struct HkManifold *m,
                                     const struct HkOperator *op,
                                     uintptr_t nu,
                                     double t,
                                     uintptr_t steps,
                                     const struct HkGrid *g,
                                     struct HkKernel **out);

/**
 * # Safety
 * `m` and `out` must be valid.
 */
enum HkStatus hk_admissible_mesh(const struct HkManifold *m, double safety, double *out);

/**
 * # Safety
 * `out` pointers must be valid.
 */
enum HkStatus hk_gaussian_weight(double t, double s, double *out);

/**
 * # Safety
 * `quad` and `exact` must be valid.
 */
enum HkStatus hk_cosine_transmute_check(double lambda, double t, double *quad, double *exact);

/**
 * # Safety
 * `lhs` and `rhs` must be valid.
 */
enum HkStatus hk_riesz_identity_check(uintptr_t order,
                                      double t,
                                      double r,
                                      double *lhs,
                                      double *rhs);

/**
 * Leading cut-locus coefficients between two points, over an equidistant
 * partition of [0, 1] with `steps` increments. Writes up to `cap`
 * components into `dims`/`coeffs`, stores the count in `len`.
 *
 * # Safety
 * Output arrays must hold at least `cap` elements.
 */
enum HkStatus hk_cut_locus_leading(const struct HkManifold *m,
                                   const struct HkOperator *op,
                                   double x0,
                                   double x1,
                                   double y0,
                                   double y1,
                                   uintptr_t steps,
                                   uintptr_t nu,
                                   uintptr_t *dims,
                                   double *coeffs,
                                   uintptr_t cap,
                                   uintptr_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATKERN_H */
