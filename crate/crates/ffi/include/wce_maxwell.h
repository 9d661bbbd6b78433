#ifndef WCE_MAXWELL_H
#define WCE_MAXWELL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WceStatus {
  WCE_STATUS_OK = 0,
  WCE_STATUS_NULL_POINTER = 1,
  WCE_STATUS_INVALID_ARGUMENT = 2,
  WCE_STATUS_CONFIG_ERROR = 3,
  WCE_STATUS_SOLVER_ERROR = 4,
  WCE_STATUS_IO_ERROR = 5,
  WCE_STATUS_OUT_OF_RANGE = 6,
  WCE_STATUS_PANIC = 7,
} WceStatus;

/**
 * Parsed experiment configuration.
 */
typedef struct WceConfig WceConfig;

/**
 * Results of a run.
 */
typedef struct WceReport WceReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * Valid until the next call into this library on the same thread.
 */
const char *wce_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wce_version(void);

/**
 * Parses a configuration document into a new handle stored in `*out`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum WceStatus wce_config_parse(const char *text, struct WceConfig **out);

/**
 * # Safety
 * `config` must come from [`wce_config_parse`] and not be freed twice.
 */
void wce_config_free(struct WceConfig *config);

/**
 * # Safety
 * `config` must be a live handle and `dir` a valid NUL-terminated string.
 */
enum WceStatus wce_config_set_output(struct WceConfig *config, const char *dir);

/**
 * Sets the estimator selection to `"wce"`, `"mc"` or `"both"`.
 *
 * # Safety
 * `config` must be a live handle and `mode` a valid NUL-terminated string.
 */
enum WceStatus wce_config_set_mode(struct WceConfig *config, const char *mode);

/**
 * Worker threads for subsequent runs; 0 uses every core.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum WceStatus wce_config_set_workers(struct WceConfig *config, size_t workers);

/**
 * Fully explicit configuration document; release with [`wce_string_free`].
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum WceStatus wce_config_to_toml(const struct WceConfig *config, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void wce_string_free(char *s);

/**
 * Runs the experiment and writes its outputs to the configured directory.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum WceStatus wce_run(const struct WceConfig *config, struct WceReport **out);

/**
 * Runs the experiment without writing any files.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum WceStatus wce_compute(const struct WceConfig *config, struct WceReport **out);

/**
 * # Safety
 * `report` must come from [`wce_run`] or [`wce_compute`] and not be freed twice.
 */
void wce_report_free(struct WceReport *report);

/**
 * Number of time levels in the energy series.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum WceStatus wce_report_energy_len(const struct WceReport *report, size_t *out);

/**
 * Time level `n` of the energy series. Estimators that did not run read NaN.
 * Any output pointer may be null.
 *
 * # Safety
 * `report` must be a live handle; non-null outputs must be valid.
 */
enum WceStatus wce_report_energy(const struct WceReport *report,
                                 size_t n,
                                 double *t,
                                 double *wce,
                                 double *mc,
                                 double *reference);

/**
 * Relative Frobenius error of moment `order` (1-4) of `component`.
 * Writes NaN when the sampled reference is identically zero.
 *
 * # Safety
 * `report` must be a live handle, `component` a valid string, `out` a valid pointer.
 */
enum WceStatus wce_report_error(const struct WceReport *report,
                                const char *component,
                                uint32_t order,
                                double *out);

/**
 * Wall-clock seconds of the WCE and MC phases; NaN for phases that did not run.
 *
 * # Safety
 * `report` must be a live handle; non-null outputs must be valid.
 */
enum WceStatus wce_report_timings(const struct WceReport *report,
                                  double *wce_seconds,
                                  double *mc_seconds);

/**
 * The report as JSON; release with [`wce_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum WceStatus wce_report_to_json(const struct WceReport *report, char **out);

/**
 * Probabilists' Hermite polynomial `He_n(x)`.
 */
double wce_hermite(uint32_t n, double x);

/**
 * Size of the truncated multi-index set for `num_wiener` channels, order `max_order`
 * and `max_basis` basis functions.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum WceStatus wce_truncation_size(uint32_t num_wiener,
                                   uint32_t max_order,
                                   uint32_t max_basis,
                                   size_t *out);

/**
 * `||candidate - reference|| / ||reference||` over `len` values.
 *
 * # Safety
 * Both arrays must hold `len` values; `out` must be a valid pointer.
 */
enum WceStatus wce_relative_error_frobenius(const double *candidate,
                                            const double *reference,
                                            size_t len,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WCE_MAXWELL_H */
