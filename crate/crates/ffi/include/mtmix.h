#ifndef MTMIX_H
#define MTMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum MtmixStatus {
  MTMIX_STATUS_OK = 0,
  MTMIX_STATUS_NULL_POINTER = 1,
  MTMIX_STATUS_DIMENSION = 2,
  MTMIX_STATUS_KERNEL = 3,
  MTMIX_STATUS_EMPTY_MEASURE = 4,
  MTMIX_STATUS_INVALID_MEASURE = 5,
  MTMIX_STATUS_DOMAIN = 6,
  MTMIX_STATUS_CONFIG = 7,
  MTMIX_STATUS_IO = 8,
  MTMIX_STATUS_PARSE = 9,
  MTMIX_STATUS_PANIC = 10,
} MtmixStatus;

/**
 * Opaque handle to a mixing measure.
 */
typedef struct MtmixMeasure MtmixMeasure;

/**
 * Opaque handle to the output of Merge-Truncate-Merge.
 */
typedef struct MtmixMtmResult MtmixMtmResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *mtmix_last_error(void);

/**
 * Builds a measure from `n` atoms in dimension `d`: `atoms` is row-major
 * `n * d`, `weights` has length `n` and must sum to 1.
 *
 * # Safety
 * `atoms` and `weights` must point to arrays of the stated lengths; `out`
 * must be writable.
 */
enum MtmixStatus mtmix_measure_new(uintptr_t d,
                                   uintptr_t n,
                                   const double *atoms,
                                   const double *weights,
                                   struct MtmixMeasure **out);

/**
 * Parses the JSON wire format `{"d": .., "atoms": [[..]], "weights": [..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MtmixStatus mtmix_measure_from_json(const char *json, struct MtmixMeasure **out);

/**
 * Serializes to the JSON wire format. Free the string with
 * [`mtmix_string_free`].
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum MtmixStatus mtmix_measure_to_json(const struct MtmixMeasure *m, char **out);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void mtmix_string_free(char *s);

/**
 * # Safety
 * `m` must be a handle from this library, or null. It is invalid afterwards.
 */
void mtmix_measure_free(struct MtmixMeasure *m);

/**
 * Number of atoms; 0 for a null handle.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
uintptr_t mtmix_measure_len(const struct MtmixMeasure *m);

/**
 * Dimension of the atoms; 0 for a null handle.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
uintptr_t mtmix_measure_dim(const struct MtmixMeasure *m);

/**
 * Copies atoms (row-major, `len * dim` values) and weights (`len` values)
 * into caller buffers. Either buffer may be null to skip it.
 *
 * # Safety
 * Non-null buffers must have room for the stated number of values.
 */
enum MtmixStatus mtmix_measure_copy(const struct MtmixMeasure *m, double *atoms, double *weights);

/**
 * `W_r(g, h)`.
 *
 * # Safety
 * `g`, `h` must be live handles; `out` must be writable.
 */
enum MtmixStatus mtmix_wasserstein(const struct MtmixMeasure *g,
                                   const struct MtmixMeasure *h,
                                   double r,
                                   double *out);

/**
 * `sqrt(ln ln n / ln n)`; fails for `n <= 2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MtmixStatus mtmix_omega_n(uint64_t n, double *out);

/**
 * Runs Merge-Truncate-Merge.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum MtmixStatus mtmix_mtm(const struct MtmixMeasure *g,
                           double omega,
                           double c,
                           double r,
                           uint64_t seed,
                           struct MtmixMtmResult **out);

/**
 * Number of recovered components; 0 for a null handle.
 *
 * # Safety
 * `res` must be a live handle or null.
 */
uintptr_t mtmix_mtm_result_k_tilde(const struct MtmixMtmResult *res);

/**
 * New measure handle holding the estimate `G~`.
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
enum MtmixStatus mtmix_mtm_result_estimate(const struct MtmixMtmResult *res,
                                           struct MtmixMeasure **out);

/**
 * New measure handle holding the stage-one merged measure `G'`.
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
enum MtmixStatus mtmix_mtm_result_merged(const struct MtmixMtmResult *res,
                                         struct MtmixMeasure **out);

/**
 * # Safety
 * `res` must be a handle from this library, or null.
 */
void mtmix_mtm_result_free(struct MtmixMtmResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MTMIX_H */
