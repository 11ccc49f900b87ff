#ifndef MCCP_H
#define MCCP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success.
 */
typedef enum MccpStatus {
  MCCP_STATUS_OK = 0,
  MCCP_STATUS_NULL_POINTER = 1,
  MCCP_STATUS_INVALID_ARGUMENT = 2,
  MCCP_STATUS_INVALID_PLAUSIBILITIES = 3,
  MCCP_STATUS_LABEL_OUT_OF_RANGE = 4,
  MCCP_STATUS_INVALID_ANNOTATIONS = 5,
  MCCP_STATUS_ALL_MASS_EXCLUDED = 6,
  MCCP_STATUS_SHAPE_MISMATCH = 7,
  MCCP_STATUS_SPLIT_TOO_SMALL = 8,
  MCCP_STATUS_EMPTY_SAMPLE = 9,
  MCCP_STATUS_NON_FINITE_SCORE = 10,
  MCCP_STATUS_IO = 11,
  MCCP_STATUS_PARSE = 12,
  MCCP_STATUS_WRONG_CALIBRATION_FORM = 13,
  MCCP_STATUS_PANIC = 14,
} MccpStatus;

/**
 * Opaque calibration handle.
 */
typedef struct MccpCalibration MccpCalibration;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mccp_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in bytes,
 * excluding the terminator; 0 when the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t mccp_last_error_message(char *buf, size_t len);

/**
 * Checks that `probs[0..k]` is a valid plausibility vector.
 *
 * # Safety
 * `probs` must point to `k` doubles.
 */
enum MccpStatus mccp_validate_plausibilities(const double *probs, size_t k);

/**
 * Label frequencies of `p` single annotations (1-based) into `out[0..k]`.
 *
 * # Safety
 * `labels` must point to `p` values and `out` to `k` writable doubles.
 */
enum MccpStatus mccp_aggregate_single_labels(const uint32_t *labels,
                                             size_t p,
                                             size_t k,
                                             double *out);

/**
 * Inverse rank normalization of partial rankings into `out[0..k]`.
 *
 * The rankings are flattened: `classes` holds every block's 1-based labels
 * back to back, `block_sizes[b]` is the size of block `b`, and
 * `ranking_sizes[q]` is the number of blocks in ranking `q`, best first.
 * Excluded classes are simply absent.
 *
 * # Safety
 * Each pointer must reference the number of elements its length names, and
 * `out` must point to `k` writable doubles.
 */
enum MccpStatus mccp_aggregate_rankings(const uint32_t *classes,
                                        size_t num_classes_listed,
                                        const size_t *block_sizes,
                                        size_t num_blocks,
                                        const size_t *ranking_sizes,
                                        size_t num_rankings,
                                        size_t k,
                                        double *out);

/**
 * Split p-value of `test_score` against `n` calibration scores.
 *
 * # Safety
 * `calib_scores` must point to `n` doubles; `out` must be writable.
 */
enum MccpStatus mccp_p_value(const double *calib_scores, size_t n, double test_score, double *out);

/**
 * Split calibration from the scores of the calibration labels.
 *
 * # Safety
 * `true_label_scores` must point to `n` doubles; `out` must be writable.
 */
enum MccpStatus mccp_calibrate_split(const double *true_label_scores,
                                     size_t n,
                                     double alpha,
                                     struct MccpCalibration **out);

/**
 * Monte Carlo calibration: `m` pseudo-labels per row drawn from the
 * plausibilities with streams derived from `seed`.
 *
 * # Safety
 * `scores` and `plausibilities` must each point to `n * k` doubles; `out`
 * must be writable.
 */
enum MccpStatus mccp_calibrate_mc(const double *scores,
                                  const double *plausibilities,
                                  size_t n,
                                  size_t k,
                                  size_t m,
                                  double alpha,
                                  uint64_t seed,
                                  struct MccpCalibration **out);

/**
 * Monte Carlo calibration with the DKW-corrected empirical CDF: the first
 * `l` rows are references with `m` pseudo-labels each, the rest estimate the
 * CDF of averaged p-values.
 *
 * # Safety
 * As for [`mccp_calibrate_mc`].
 */
enum MccpStatus mccp_calibrate_ecdf_mc(const double *scores,
                                       const double *plausibilities,
                                       size_t n,
                                       size_t k,
                                       size_t m,
                                       size_t l,
                                       double delta,
                                       double alpha,
                                       uint64_t seed,
                                       struct MccpCalibration **out);

/**
 * Loads a calibration JSON file as written by the `mccp calibrate` command.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MccpStatus mccp_calibration_load(const char *path, struct MccpCalibration **out);

/**
 * Writes the calibration as JSON.
 *
 * # Safety
 * `calibration` must be a live handle and `path` a NUL-terminated string.
 */
enum MccpStatus mccp_calibration_save(const struct MccpCalibration *calibration, const char *path);

/**
 * # Safety
 * `calibration` must be a live handle; `out` must be writable.
 */
enum MccpStatus mccp_calibration_alpha(const struct MccpCalibration *calibration, double *out);

/**
 * Prediction set for one score row. `in_set[c]` becomes 1 for included
 * classes and 0 otherwise. When `p_values` is non-null it receives each
 * class's (possibly corrected) p-value, or NaN for threshold-only forms.
 *
 * # Safety
 * `calibration` must be a live handle; `row` and `in_set` must point to `k`
 * elements, and `p_values` to `k` doubles when non-null.
 */
enum MccpStatus mccp_predict(const struct MccpCalibration *calibration,
                             const double *row,
                             size_t k,
                             uint8_t *in_set,
                             double *p_values);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `calibration` must be null or a handle not yet freed.
 */
void mccp_calibration_free(struct MccpCalibration *calibration);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCCP_H */
