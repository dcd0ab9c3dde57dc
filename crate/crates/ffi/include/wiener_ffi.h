#ifndef WIENER_FFI_H
#define WIENER_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum WienerStatus {
  WIENER_STATUS_OK = 0,
  WIENER_STATUS_NULL_POINTER = 1,
  WIENER_STATUS_INVALID_ARGUMENT = 2,
  WIENER_STATUS_DIMENSION_MISMATCH = 3,
  WIENER_STATUS_GROUP_MISMATCH = 4,
  WIENER_STATUS_GRID_MISMATCH = 5,
  WIENER_STATUS_NON_FINITE = 6,
  WIENER_STATUS_PARSE = 7,
  WIENER_STATUS_IO = 8,
  WIENER_STATUS_PANIC = 9,
} WienerStatus;

/**
 * Complex samples on a grid.
 */
typedef struct WienerFunction WienerFunction;

/**
 * Tabulation grid.
 */
typedef struct WienerGrid WienerGrid;

/**
 * Amalgam space `W(B, Y, Q)`.
 */
typedef struct WienerSpace WienerSpace;

/**
 * Weight function.
 */
typedef struct WienerWeight WienerWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *wiener_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wiener_version(void);

/**
 * Grid from JSON `{"group": {...}, "axes": [...]}`.
 */
enum WienerStatus wiener_grid_new_json(const char *json, struct WienerGrid **out);

/**
 * Nodes `k·h`, `|k·h| ≤ half_width`, on the line.
 */
enum WienerStatus wiener_grid_new_line(double h, double half_width, struct WienerGrid **out);

/**
 * Integers `lo..=hi`.
 */
enum WienerStatus wiener_grid_new_integers(int64_t lo, int64_t hi, struct WienerGrid **out);

/**
 * `ax+b` grid, `x` nodes of step `h` up to `x_half`, dilations
 * `2^{m/levels}` for `|m| ≤ octaves·levels`.
 */
enum WienerStatus wiener_grid_new_axb(double h,
                                      double x_half,
                                      int64_t octaves,
                                      int64_t levels,
                                      struct WienerGrid **out);

void wiener_grid_free(struct WienerGrid *grid);

/**
 * Number of samples, or 0 for a null handle.
 */
size_t wiener_grid_len(const struct WienerGrid *grid);

/**
 * Coordinates per sample, or 0 for a null handle.
 */
size_t wiener_grid_dim(const struct WienerGrid *grid);

/**
 * Writes all sample coordinates, sample-major, into `out[len]` with
 * `len = grid_len · grid_dim`.
 */
enum WienerStatus wiener_grid_points(const struct WienerGrid *grid, double *out, size_t len);

/**
 * Function from real samples; `im` may be null.
 */
enum WienerStatus wiener_function_new(const struct WienerGrid *grid,
                                      const double *re,
                                      const double *im,
                                      size_t len,
                                      struct WienerFunction **out);

void wiener_function_free(struct WienerFunction *f);

size_t wiener_function_len(const struct WienerFunction *f);

/**
 * Copies the samples; either output may be null.
 */
enum WienerStatus wiener_function_values(const struct WienerFunction *f,
                                         double *re,
                                         double *im,
                                         size_t len);

/**
 * Space from JSON `{"local": "linf", "global": {...}, "window": {...}}`.
 */
enum WienerStatus wiener_space_new_json(const char *json, struct WienerSpace **out);

void wiener_space_free(struct WienerSpace *s);

/**
 * `‖F | W(B, Y, Q)‖`. On divergence `*value = +∞` and `*overflow = 1`;
 * `overflow` may be null.
 */
enum WienerStatus wiener_amalgam_norm(const struct WienerSpace *space,
                                      const struct WienerFunction *f,
                                      double *value,
                                      int *overflow);

/**
 * `‖F | Y‖` for the global component of `space`.
 */
enum WienerStatus wiener_global_norm(const struct WienerSpace *space,
                                     const struct WienerFunction *f,
                                     double *value,
                                     int *overflow);

/**
 * `F * G` on `F`'s grid; `truncation` (nullable) receives the share of
 * mass outside the grid.
 */
enum WienerStatus wiener_convolve(const struct WienerFunction *f,
                                  const struct WienerFunction *g,
                                  struct WienerFunction **out,
                                  double *truncation);

/**
 * Weight from JSON, e.g. `{"family": "shifted-power", "s": 2.0}`.
 */
enum WienerStatus wiener_weight_new_json(const char *json, struct WienerWeight **out);

void wiener_weight_free(struct WienerWeight *w);

/**
 * Doubling check on `ℝⁿ` with the standard probes. `*is_doubling` is 1 on
 * success, with `(c, α)` written; 0 on a growth witness.
 */
enum WienerStatus wiener_check_doubling(const struct WienerWeight *w,
                                        size_t n,
                                        int *is_doubling,
                                        double *c,
                                        double *alpha);

/**
 * `b^{n(1+1/q)}·(1 + |y|/b)^{α/p}`.
 */
double wiener_axb_translation_bound(double y, double b, double p, double q, double alpha, size_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIENER_FFI_H */
