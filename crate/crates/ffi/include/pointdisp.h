#ifndef POINTDISP_H
#define POINTDISP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_NULL_POINTER = 1,
  PD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Centers or strengths do not form a valid configuration.
   */
  PD_STATUS_INVALID_CONFIG = 3,
  /**
   * Evaluation at a singular point or pole.
   */
  PD_STATUS_SINGULAR = 4,
  /**
   * A norm or integral diverges.
   */
  PD_STATUS_DIVERGENT = 5,
  /**
   * An iterative or adaptive step did not reach its tolerance.
   */
  PD_STATUS_NO_CONVERGENCE = 6,
  /**
   * The output buffer is shorter than the result; the required length is
   * still reported.
   */
  PD_STATUS_BUFFER_TOO_SMALL = 7,
  PD_STATUS_IO = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  PD_STATUS_PANIC = 9,
} PdStatus;

typedef enum PdProjection {
  /**
   * Remove the bound-state component first.
   */
  PD_PROJECTION_AC = 0,
  PD_PROJECTION_FULL = 1,
} PdProjection;

typedef enum PdDecayCase {
  PD_DECAY_CASE_GENERIC = 0,
  PD_DECAY_CASE_RESONANT = 1,
  PD_DECAY_CASE_RESONANT_ENDPOINT = 2,
} PdDecayCase;

/**
 * Opaque interaction configuration.
 */
typedef struct PdConfig PdConfig;

/**
 * Opaque radial function `f(x) = f̃(|x|)` sampled on a radial grid.
 */
typedef struct PdRadial PdRadial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or `""`. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *pd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pd_version(void);

/**
 * Build a configuration from `n` centers (`3n` doubles, x y z per center)
 * and `n` strengths; `+INFINITY` marks an inert center.
 *
 * # Safety
 * `centers` must point to `3n` doubles, `strengths` to `n` doubles and
 * `out` to writable storage for one pointer.
 */
enum PdStatus pd_config_new(const double *centers,
                            const double *strengths,
                            size_t n,
                            struct PdConfig **out);

/**
 * # Safety
 * `cfg` must come from [`pd_config_new`] and not have been freed; null is
 * accepted.
 */
void pd_config_free(struct PdConfig *cfg);

/**
 * Negative eigenvalues `−λ²` (with multiplicity, ascending `λ`). `count`
 * receives the number found; at most `capacity` are written.
 *
 * # Safety
 * `cfg` must be a live handle, `eigenvalues` must hold `capacity` doubles
 * (may be null when `capacity == 0`) and `count` must be writable.
 */
enum PdStatus pd_spectrum(const struct PdConfig *cfg,
                          double *eigenvalues,
                          size_t capacity,
                          size_t *count);

/**
 * `ψ_α(r) = √(−2α) e^{4παr}/r` for `α < 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PdStatus pd_bound_state_value(double alpha, double r, double *out);

/**
 * Radial Gaussian `e^{−r²/σ²}` on the grid used by the decay experiments.
 *
 * # Safety
 * `out` must be writable.
 */
enum PdStatus pd_radial_gaussian(double width2, struct PdRadial **out);

/**
 * # Safety
 * `f` must come from this library and not have been freed; null is accepted.
 */
void pd_radial_free(struct PdRadial *f);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `f` must be a live handle or null.
 */
size_t pd_radial_len(const struct PdRadial *f);

/**
 * Sample `i`: radius and complex value.
 *
 * # Safety
 * `f` must be a live handle; `r`, `re`, `im` must be writable.
 */
enum PdStatus pd_radial_get(const struct PdRadial *f, size_t i, double *r, double *re, double *im);

/**
 * Unweighted `‖f‖_p` over `ℝ³`; `p = INFINITY` gives the sample maximum.
 *
 * # Safety
 * `f` must be a live handle and `out` writable.
 */
enum PdStatus pd_radial_lp_norm(const struct PdRadial *f, double p, double *out);

/**
 * `e^{−itH} f` for a single-center configuration; the result is a new handle.
 *
 * # Safety
 * `cfg` and `f` must be live handles and `out` writable.
 */
enum PdStatus pd_evolve(const struct PdConfig *cfg,
                        const struct PdRadial *f,
                        double t,
                        enum PdProjection projection,
                        struct PdRadial **out);

/**
 * Predicted decay exponent for dual `(p, q)`; `INFINITY` is allowed.
 *
 * # Safety
 * `out` must be writable.
 */
enum PdStatus pd_predicted_exponent(double p, double q, enum PdDecayCase decay_case, double *out);

/**
 * Least-squares slope of `ln y` against `ln t` over `n ≥ 4` positive pairs.
 *
 * # Safety
 * `t` and `y` must point to `n` doubles; `slope` and `std_error` must be
 * writable.
 */
enum PdStatus pd_fit_power_law(const double *t,
                               const double *y,
                               size_t n,
                               double *slope,
                               double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POINTDISP_H */
