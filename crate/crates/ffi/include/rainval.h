#ifndef RAINVAL_H
#define RAINVAL_H

/* Auto-generated by the rainval-ffi build script; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call.
 */
typedef enum RvStatus {
  RV_STATUS_OK = 0,
  RV_STATUS_NULL_POINTER = 1,
  RV_STATUS_INVALID_ARGUMENT = 2,
  RV_STATUS_DEGENERATE_INPUT = 3,
  RV_STATUS_CONFIG_ERROR = 4,
  RV_STATUS_IO_ERROR = 5,
  RV_STATUS_INTERNAL_ERROR = 6,
} RvStatus;

/**
 * Rainfall intensity class; boundaries belong to the upper class.
 */
typedef enum RvIntensityCategory {
  RV_INTENSITY_CATEGORY_DRY = 0,
  RV_INTENSITY_CATEGORY_LIGHT = 1,
  RV_INTENSITY_CATEGORY_MODERATE = 2,
  RV_INTENSITY_CATEGORY_HEAVY = 3,
  RV_INTENSITY_CATEGORY_VIOLENT = 4,
} RvIntensityCategory;

/**
 * Opaque fitted occurrence model.
 */
typedef struct RvHarmonicModel RvHarmonicModel;

/**
 * Continuous scores; each value is meaningful only when its `has_` flag is
 * set (an unset flag means the metric was undefined for the input).
 */
typedef struct RvContinuousScores {
  size_t n;
  double me;
  bool has_me;
  double pbias;
  bool has_pbias;
  double r;
  bool has_r;
  double rsd;
  bool has_rsd;
} RvContinuousScores;

/**
 * Rain-day detection counts.
 */
typedef struct RvContingency {
  uint64_t hits;
  uint64_t misses;
  uint64_t false_alarms;
  uint64_t correct_negatives;
} RvContingency;

/**
 * Shape and fit diagnostics of an occurrence model.
 */
typedef struct RvModelInfo {
  size_t harmonics;
  size_t n_obs;
  bool converged;
  double deviance;
} RvModelInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rv_version(void);

/**
 * Static description of a status code.
 */
const char *rv_status_message(enum RvStatus status);

/**
 * Detail text of the most recent failure on this thread, or NULL.
 * The caller owns the returned string and frees it with [`rv_string_free`].
 */
char *rv_last_error_message(void);

/**
 * Frees a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must have been returned by [`rv_last_error_message`] and not yet
 * freed.
 */
void rv_string_free(char *s);

/**
 * Computes mean error, percent bias, correlation, and the standard
 * deviation ratio of `product` against `gauge` over `n` pairs.
 *
 * # Safety
 * `product` and `gauge` must point to `n` readable doubles; `out` must be
 * a valid pointer.
 */
enum RvStatus rv_continuous_scores(const double *product,
                                   const double *gauge,
                                   size_t n,
                                   struct RvContinuousScores *out);

/**
 * Classifies a daily depth in millimetres.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RvStatus rv_classify_intensity(double mm, enum RvIntensityCategory *out);

/**
 * Counts rain-day hits, misses, false alarms, and correct negatives at a
 * threshold.
 *
 * # Safety
 * `gauge` and `product` must point to `n` readable doubles; `out` must be
 * a valid pointer.
 */
enum RvStatus rv_rain_day_contingency(const double *gauge,
                                      const double *product,
                                      size_t n,
                                      double threshold,
                                      struct RvContingency *out);

/**
 * Probability of detection from a contingency table. Fails with
 * `DegenerateInput` when no events were observed.
 *
 * # Safety
 * `table` and `out` must be valid pointers.
 */
enum RvStatus rv_contingency_pod(const struct RvContingency *table, double *out);

/**
 * Fits an occurrence model to `n` (day-of-year, wet) observations with the
 * given harmonic count. Day indices are 1..=365; outcomes are 0 or 1.
 * On success writes an owned handle that must be freed with
 * [`rv_model_free`].
 *
 * # Safety
 * `day_index` and `outcome` must point to `n` readable elements; `out`
 * must be a valid pointer.
 */
enum RvStatus rv_fit_occurrence(const uint32_t *day_index,
                                const uint8_t *outcome,
                                size_t n,
                                size_t harmonics,
                                struct RvHarmonicModel **out);

/**
 * Rain-day probability at day-of-year `t` (periodic beyond 365).
 *
 * # Safety
 * `model` must be a live handle from [`rv_fit_occurrence`]; `out` must be
 * a valid pointer.
 */
enum RvStatus rv_model_predict(const struct RvHarmonicModel *model, double t, double *out);

/**
 * Shape and diagnostics of a fitted model.
 *
 * # Safety
 * `model` must be a live handle; `out` must be a valid pointer.
 */
enum RvStatus rv_model_info(const struct RvHarmonicModel *model, struct RvModelInfo *out);

/**
 * Copies `[beta0, A1, B1, ..., Ak, Bk]` into `buf` and writes the count to
 * `written`. Fails with `InvalidArgument` when `buf_len` is too small.
 *
 * # Safety
 * `model` must be a live handle; `buf` must point to `buf_len` writable
 * doubles; `written` must be a valid pointer.
 */
enum RvStatus rv_model_coefficients(const struct RvHarmonicModel *model,
                                    double *buf,
                                    size_t buf_len,
                                    size_t *written);

/**
 * Frees a model handle. NULL is a no-op.
 *
 * # Safety
 * `model` must have come from [`rv_fit_occurrence`] and not yet be freed.
 */
void rv_model_free(struct RvHarmonicModel *model);

/**
 * Runs the full validation pipeline from a TOML config file, writing all
 * outputs to the config's output directory.
 *
 * # Safety
 * `config_path` must be a readable NUL-terminated string.
 */
enum RvStatus rv_run_pipeline(const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAINVAL_H */
