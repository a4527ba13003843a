#ifndef GEOMECH_H
#define GEOMECH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_POINTER = 1,
  GM_STATUS_INVALID_UTF8 = 2,
  GM_STATUS_PARSE_ERROR = 3,
  GM_STATUS_EVAL_ERROR = 4,
  GM_STATUS_SPEC_ERROR = 5,
  GM_STATUS_OUT_OF_RANGE = 6,
  GM_STATUS_PANIC = 7,
} GmStatus;

/**
 * Outcome of a probabilistic equality test.
 */
typedef enum GmEquality {
  GM_EQUALITY_NOT_EQUAL = 0,
  GM_EQUALITY_EQUAL = 1,
  GM_EQUALITY_UNDECIDED = 2,
} GmEquality;

/**
 * Status of one report record.
 */
typedef enum GmCheckStatus {
  GM_CHECK_STATUS_PASS = 0,
  GM_CHECK_STATUS_FAIL = 1,
  GM_CHECK_STATUS_DEGENERATE = 2,
  GM_CHECK_STATUS_UNDECIDED = 3,
} GmCheckStatus;

/**
 * A symbolic expression.
 */
typedef struct GmExpr GmExpr;

/**
 * The result of running a specification.
 */
typedef struct GmReport GmReport;

/**
 * A parsed and resolved specification.
 */
typedef struct GmSpec GmSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *gm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gm_version(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void gm_string_free(char *s);

/**
 * Parses `text` with the comma-separated `symbols` and `functions` in
 * scope (`functions` may be NULL).
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum GmStatus gm_expr_parse(const char *text,
                            const char *symbols,
                            const char *functions,
                            struct GmExpr **out);

/**
 * # Safety
 * `e` must come from this library and not have been freed.
 */
void gm_expr_free(struct GmExpr *e);

/**
 * Printed form; free with [`gm_string_free`]. NULL on a NULL handle.
 *
 * # Safety
 * `e` must be a live handle or NULL.
 */
char *gm_expr_to_string(const struct GmExpr *e);

/**
 * `∂e/∂var` as a new handle.
 *
 * # Safety
 * `e` must be a live handle, `var` NUL-terminated, `out` writable.
 */
enum GmStatus gm_expr_differentiate(const struct GmExpr *e, const char *var, struct GmExpr **out);

/**
 * Evaluates `e` at `names[i] = values[i]`. Opaque functions use the
 * generic sampling bodies.
 *
 * # Safety
 * `names` and `values` must hold `n` entries; `out` must be writable.
 */
enum GmStatus gm_expr_eval(const struct GmExpr *e,
                           const char *const *names,
                           const double *values,
                           size_t n,
                           double *out);

/**
 * Probabilistic equality with `samples` points drawn from `seed`
 * (`samples = 0` selects the default of 16).
 *
 * # Safety
 * `a` and `b` must be live handles; `out` writable.
 */
enum GmStatus gm_expr_equal(const struct GmExpr *a,
                            const struct GmExpr *b,
                            uint64_t seed,
                            size_t samples,
                            double tol,
                            enum GmEquality *out);

/**
 * Parses a specification from its text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` writable.
 */
enum GmStatus gm_spec_parse(const char *text, struct GmSpec **out);

/**
 * Loads a specification file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum GmStatus gm_spec_load(const char *path, struct GmSpec **out);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void gm_spec_free(struct GmSpec *s);

/**
 * Number of checks declared in the specification, or 0 for NULL.
 *
 * # Safety
 * `s` must be a live handle or NULL.
 */
size_t gm_spec_check_count(const struct GmSpec *s);

/**
 * Runs the checks listed in the comma-separated `only` (NULL for all).
 * `samples = 0` and `tol <= 0` select the defaults.
 *
 * # Safety
 * `s` must be a live handle; `only` NULL or NUL-terminated; `out` writable.
 */
enum GmStatus gm_spec_run(const struct GmSpec *s,
                          const char *only,
                          uint64_t seed,
                          size_t samples,
                          double tol,
                          struct GmReport **out);

/**
 * # Safety
 * `r` must come from this library and not have been freed.
 */
void gm_report_free(struct GmReport *r);

/**
 * Number of records, or 0 for NULL.
 *
 * # Safety
 * `r` must be a live handle or NULL.
 */
size_t gm_report_len(const struct GmReport *r);

/**
 * 1 when every record passed, 0 otherwise (including NULL).
 *
 * # Safety
 * `r` must be a live handle or NULL.
 */
int gm_report_all_pass(const struct GmReport *r);

/**
 * Status of record `i`.
 *
 * # Safety
 * `r` must be a live handle; `out` writable.
 */
enum GmStatus gm_report_status(const struct GmReport *r, size_t i, enum GmCheckStatus *out);

/**
 * Id of record `i`; free with [`gm_string_free`]. NULL when out of range.
 *
 * # Safety
 * `r` must be a live handle or NULL.
 */
char *gm_report_id(const struct GmReport *r, size_t i);

/**
 * Witness coordinate `name` of record `i`, if the record has one.
 *
 * # Safety
 * `r` must be a live handle; `name` NUL-terminated; `out` writable.
 */
enum GmStatus gm_report_witness(const struct GmReport *r, size_t i, const char *name, double *out);

/**
 * The whole report as JSONL; free with [`gm_string_free`].
 *
 * # Safety
 * `r` must be a live handle or NULL.
 */
char *gm_report_jsonl(const struct GmReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOMECH_H */
