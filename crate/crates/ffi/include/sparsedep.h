#ifndef SPARSEDEP_H
#define SPARSEDEP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdBoundaryKind {
  SD_BOUNDARY_KIND_GAMMA = 0,
  SD_BOUNDARY_KIND_POWERLESS = 1,
  SD_BOUNDARY_KIND_NONE_PROVEN = 2,
} SdBoundaryKind;

typedef enum SdCalibration {
  /**
   * The test's usual calibration.
   */
  SD_CALIBRATION_DEFAULT = 0,
  SD_CALIBRATION_EXACT = 1,
  SD_CALIBRATION_PERMUTATION = 2,
  SD_CALIBRATION_MONTE_CARLO = 3,
  SD_CALIBRATION_LIMITING = 4,
} SdCalibration;

typedef enum SdRegime {
  SD_REGIME_DENSE = 0,
  SD_REGIME_SPARSE = 1,
} SdRegime;

/**
 * Status code returned by every fallible function.
 */
typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_ARGUMENT = 2,
  SD_STATUS_INVALID_SAMPLE = 3,
  SD_STATUS_TIE = 4,
  SD_STATUS_DOMAIN = 5,
  SD_STATUS_IO = 6,
  SD_STATUS_PANIC = 7,
} SdStatus;

typedef enum SdTest {
  SD_TEST_LRT = 0,
  SD_TEST_COV = 1,
  SD_TEST_PEARSON = 2,
  SD_TEST_EXTREMES = 3,
  SD_TEST_HC = 4,
  SD_TEST_HC_PLUGIN = 5,
  SD_TEST_SPEARMAN = 6,
  SD_TEST_HC_RANK = 7,
} SdTest;

/**
 * Opaque paired sample.
 */
typedef struct SdSample SdSample;

/**
 * Result of a calibrated test. `p_value` is NaN when `has_p_value` is 0.
 */
typedef struct SdOutcome {
  double statistic;
  double p_value;
  bool has_p_value;
  size_t n;
  uint64_t seed;
  size_t calibration_reps;
} SdOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last error on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sd_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

/**
 * Copies `n` pairs into a new sample.
 *
 * # Safety
 * `x` and `y` must point to `n` readable doubles; `out` must be writable.
 */
enum SdStatus sd_sample_new(const double *x, const double *y, size_t n, struct SdSample **out);

/**
 * Draws `n` pairs from the mixture with weight `eps` and correlation `rho`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SdStatus sd_sample_generate_gmm(double eps,
                                     double rho,
                                     size_t n,
                                     uint64_t seed,
                                     struct SdSample **out);

/**
 * Number of pairs; 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t sd_sample_len(const struct SdSample *sample);

/**
 * Copies the sample into `x` and `y`, each with room for `capacity` values.
 *
 * # Safety
 * `sample` must be a live handle; `x` and `y` must have `capacity` writable doubles.
 */
enum SdStatus sd_sample_copy(const struct SdSample *sample, double *x, double *y, size_t capacity);

/**
 * Releases a sample. Null is ignored.
 *
 * # Safety
 * `sample` must be null or a handle not yet freed.
 */
void sd_sample_free(struct SdSample *sample);

/**
 * Evaluates a test statistic without calibration. `eps` and `rho` are used
 * by the likelihood ratio test only; pass NaN otherwise.
 *
 * # Safety
 * `sample` must be a live handle and `out` writable.
 */
enum SdStatus sd_statistic(const struct SdSample *sample,
                           enum SdTest test,
                           double eps,
                           double rho,
                           double *out);

/**
 * Runs a calibrated test. `reps` of 0 selects the test's usual count.
 *
 * # Safety
 * `sample` must be a live handle and `out` writable.
 */
enum SdStatus sd_run_test(const struct SdSample *sample,
                          enum SdTest test,
                          enum SdCalibration calibration,
                          size_t reps,
                          uint64_t seed,
                          double eps,
                          double rho,
                          struct SdOutcome *out);

/**
 * `P(|Z| <= t)` for a standard normal `Z`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SdStatus sd_psi(double t, double *out);

/**
 * Exact null p-value of the extremes statistic `m` at sample size `n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SdStatus sd_extremes_pvalue(double m, uint64_t n, double *out);

/**
 * Theoretical detection boundary. `gamma` is written only when `kind` is
 * `SD_BOUNDARY_KIND_GAMMA`; otherwise it is set to NaN.
 *
 * # Safety
 * `kind` and `gamma` must be writable.
 */
enum SdStatus sd_boundary(enum SdRegime regime,
                          double beta,
                          enum SdTest test,
                          enum SdBoundaryKind *kind,
                          double *gamma);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSEDEP_H */
