#ifndef CODED_PIR_H
#define CODED_PIR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PirStatus {
  PIR_STATUS_OK = 0,
  PIR_STATUS_NULL_POINTER = 1,
  PIR_STATUS_INVALID_UTF8 = 2,
  PIR_STATUS_INVALID_JSON = 3,
  PIR_STATUS_PRECONDITION_VIOLATED = 4,
  PIR_STATUS_OUT_OF_RANGE = 5,
  PIR_STATUS_DECODING_FAILURE = 6,
  PIR_STATUS_AUDIT_FAILED = 7,
  PIR_STATUS_INTERNAL = 8,
} PirStatus;

/**
 * Opaque handle to a built query plan.
 */
typedef struct PirPlan PirPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. Valid until
 * the next call into the library from this thread.
 */
const char *pir_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pir_string_free(char *s);

/**
 * Builds a plan from scheme parameters in JSON.
 *
 * # Safety
 * `params_json` must be NUL-terminated; `out` must be writable.
 */
enum PirStatus pir_plan_build(const char *params_json, struct PirPlan **out);

/**
 * # Safety
 * `plan` must be NULL or a handle from [`pir_plan_build`] not yet freed.
 */
void pir_plan_free(struct PirPlan *plan);

/**
 * # Safety
 * `plan` must be live; `out` must be writable.
 */
enum PirStatus pir_plan_to_json(const struct PirPlan *plan, char **out);

/**
 * Rows per file (L).
 *
 * # Safety
 * `plan` must be live; `out` must be writable.
 */
enum PirStatus pir_plan_rows(const struct PirPlan *plan, size_t *out);

/**
 * Number of queries sent to `server`.
 *
 * # Safety
 * `plan` must be live; `out` must be writable.
 */
enum PirStatus pir_plan_query_count(const struct PirPlan *plan, size_t server, size_t *out);

/**
 * Writes query `index` of `server` as an M·L coefficient vector into
 * `buf`, which must hold exactly `len` = M·L elements.
 *
 * # Safety
 * `plan` must be live; `buf` must have `len` writable elements.
 */
enum PirStatus pir_plan_query_vector(const struct PirPlan *plan,
                                     size_t server,
                                     size_t index,
                                     uint64_t *buf,
                                     size_t len);

/**
 * Closed-form rate as `"num/den"`.
 *
 * # Safety
 * `params_json` must be NUL-terminated; `out` must be writable.
 */
enum PirStatus pir_closed_form_rate(const char *params_json, char **out);

/**
 * Runs the privacy sweep; writes its JSON and returns
 * `PIR_STATUS_AUDIT_FAILED` when some set fails.
 *
 * # Safety
 * `plan` must be live; `out` must be writable.
 */
enum PirStatus pir_plan_audit(const struct PirPlan *plan, char **out);

/**
 * Runs one session against a random database and decodes it. Writes a
 * rate report JSON; returns `PIR_STATUS_DECODING_FAILURE` when the desired
 * files are not recovered exactly.
 *
 * # Safety
 * `plan` must be live; `absent`/`corrupt` must hold `n_absent`/`n_corrupt`
 * readable elements (either may be NULL when its length is 0); `out` must
 * be writable.
 */
enum PirStatus pir_plan_simulate(const struct PirPlan *plan,
                                 uint64_t db_seed,
                                 const size_t *absent,
                                 size_t n_absent,
                                 const size_t *corrupt,
                                 size_t n_corrupt,
                                 uint64_t corruption_seed,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODED_PIR_H */
