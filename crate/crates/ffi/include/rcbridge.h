#ifndef RCBRIDGE_H
#define RCBRIDGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcbStatus {
  RCB_STATUS_OK = 0,
  RCB_STATUS_NULL_POINTER = 1,
  RCB_STATUS_INVALID_UTF8 = 2,
  RCB_STATUS_VALIDATION = 3,
  RCB_STATUS_NUMERICAL = 4,
  RCB_STATUS_STATE = 5,
  RCB_STATUS_IO = 6,
  RCB_STATUS_PARSE = 7,
  RCB_STATUS_PANIC = 8,
} RcbStatus;

/**
 * Bridge description. Create with `rcb_config_default` or `rcb_config_from_json`.
 */
typedef struct RcbConfig RcbConfig;

/**
 * A trained surrogate.
 */
typedef struct RcbModel RcbModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *rcb_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *rcb_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void rcb_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RcbStatus rcb_config_default(struct RcbConfig **out);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be valid for writes.
 */
enum RcbStatus rcb_config_from_json(const char *json, struct RcbConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library, not yet freed.
 */
void rcb_config_free(struct RcbConfig *config);

/**
 * SHA-256 of the configuration; free the string with `rcb_string_free`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes.
 */
enum RcbStatus rcb_config_hash(const struct RcbConfig *config, char **out);

/**
 * Maximum rebar tensile stress (Pa) for piers at `x1 < x2 < x3` and deck
 * thickness `h`, all in metres.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes.
 */
enum RcbStatus rcb_max_steel_stress(const struct RcbConfig *config,
                                    double x1,
                                    double x2,
                                    double x3,
                                    double h,
                                    double *out);

/**
 * Latin Hypercube design of `n` points in `d` dimensions written row-major
 * to `out` (`n * d` values). `bounds` holds `d` `[lower, upper]` pairs; null
 * selects the bridge variables (`d` must then be 4).
 *
 * # Safety
 * `bounds` must be null or hold `2 * d` values; `out` must hold `n * d` values.
 */
enum RcbStatus rcb_lhs_sample(size_t n, size_t d, const double *bounds, uint64_t seed, double *out);

/**
 * Trains a surrogate. `family` is `kriging_p0` .. `kriging_p4`, `pce` or
 * `svr`; `inputs` is row-major `n * d`; `bounds` as in `rcb_lhs_sample`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be valid for writes.
 */
enum RcbStatus rcb_model_train(const char *family,
                               const double *inputs,
                               const double *outputs,
                               size_t n,
                               size_t d,
                               const double *bounds,
                               struct RcbModel **out);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be valid for writes.
 */
enum RcbStatus rcb_model_from_json(const char *json, struct RcbModel **out);

/**
 * JSON form of a model; free the string with `rcb_string_free`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum RcbStatus rcb_model_to_json(const struct RcbModel *model, char **out);

/**
 * Mean prediction at `n` row-major points of dimension `d` into `out`.
 *
 * # Safety
 * `model` must be a live handle; `points` must hold `n * d` values and `out` `n`.
 */
enum RcbStatus rcb_model_predict(const struct RcbModel *model,
                                 const double *points,
                                 size_t n,
                                 size_t d,
                                 double *out);

/**
 * # Safety
 * `model` must be null or a handle from this library, not yet freed.
 */
void rcb_model_free(struct RcbModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RCBRIDGE_H */
