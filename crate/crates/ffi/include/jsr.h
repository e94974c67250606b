#ifndef JSR_H
#define JSR_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum JsrStatus {
  JSR_STATUS_OK = 0,
  JSR_STATUS_NULL_POINTER = 1,
  JSR_STATUS_INVALID_INPUT = 2,
  JSR_STATUS_PARSE = 3,
  JSR_STATUS_NUMERICAL = 4,
  JSR_STATUS_LINEAR_PROGRAM = 5,
  JSR_STATUS_NO_CANDIDATE = 6,
  JSR_STATUS_BALANCING = 7,
  JSR_STATUS_IO = 8,
  /**
   * The polytope did not close within the iteration limit. The
   * certificate is still returned but does not certify the JSR.
   */
  JSR_STATUS_NOT_CERTIFIED = 9,
  JSR_STATUS_INTERNAL = 10,
} JsrStatus;

/**
 * Opaque certificate.
 */
typedef struct JsrCertificate JsrCertificate;

/**
 * Opaque matrix family.
 */
typedef struct JsrFamily JsrFamily;

/**
 * Tunable settings; obtain defaults from `jsr_options_default`.
 */
typedef struct JsrOptions {
  size_t n_bar;
  size_t k_balance;
  size_t k_max;
  double delta_int;
  bool adjoint;
  bool parallel;
} JsrOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *jsr_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void jsr_string_free(char *s);

struct JsrOptions jsr_options_default(void);

/**
 * Builds a family from `count` square matrices of size `dim`, stored
 * one after another in row-major order.
 *
 * # Safety
 * `data` must point to `count * dim * dim` doubles; `out` must be valid.
 */
enum JsrStatus jsr_family_new(size_t dim, size_t count, const double *data, struct JsrFamily **out);

/**
 * Parses a family file held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid.
 */
enum JsrStatus jsr_family_parse(const char *text, struct JsrFamily **out);

/**
 * # Safety
 * `family` must come from this library or be NULL.
 */
void jsr_family_free(struct JsrFamily *family);

/**
 * # Safety
 * `family` must be a valid handle.
 */
size_t jsr_family_dim(const struct JsrFamily *family);

/**
 * # Safety
 * `family` must be a valid handle.
 */
size_t jsr_family_count(const struct JsrFamily *family);

/**
 * Runs the full computation. `options` may be NULL for defaults. A
 * certificate is produced both for certified runs (`Ok`) and for runs
 * that hit the iteration limit (`NotCertified`).
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum JsrStatus jsr_compute(const struct JsrFamily *family,
                           const struct JsrOptions *options,
                           struct JsrCertificate **out);

/**
 * # Safety
 * `cert` must come from this library or be NULL.
 */
void jsr_certificate_free(struct JsrCertificate *cert);

/**
 * # Safety
 * `cert` must be a valid handle.
 */
double jsr_certificate_value(const struct JsrCertificate *cert);

/**
 * # Safety
 * `cert` must be a valid handle.
 */
bool jsr_certificate_terminated(const struct JsrCertificate *cert);

/**
 * # Safety
 * `cert` must be a valid handle.
 */
size_t jsr_certificate_iterations(const struct JsrCertificate *cert);

/**
 * Number of stored vertices; each stands for itself and its negative.
 *
 * # Safety
 * `cert` must be a valid handle.
 */
size_t jsr_certificate_vertex_count(const struct JsrCertificate *cert);

/**
 * Copies vertex `index` into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `cert` must be valid and `buf` must hold `len` doubles.
 */
enum JsrStatus jsr_certificate_vertex(const struct JsrCertificate *cert,
                                      size_t index,
                                      double *buf,
                                      size_t len);

/**
 * Maximizing products as text, one-based letters, e.g. `"[1]; [1 2]"`.
 *
 * # Safety
 * `cert` must be valid; `out` receives a string for `jsr_string_free`.
 */
enum JsrStatus jsr_certificate_smp(const struct JsrCertificate *cert, char **out);

/**
 * # Safety
 * `cert` must be valid; `out` receives a string for `jsr_string_free`.
 */
enum JsrStatus jsr_certificate_to_json(const struct JsrCertificate *cert, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum JsrStatus jsr_certificate_from_json(const char *json, struct JsrCertificate **out);

/**
 * Independent recheck. `passed` is set to the verdict and `residual`
 * (optional) to the recomputed invariance residual.
 *
 * # Safety
 * `cert` must be valid; `passed` must be writable; `residual` may be NULL.
 */
enum JsrStatus jsr_verify(const struct JsrCertificate *cert, bool *passed, double *residual);

/**
 * Hölder exponent of the Daubechies wavelet of order `n` (2..=20) with
 * default settings. `jsr` (optional) receives the certified JSR.
 *
 * # Safety
 * `alpha` must be writable; `jsr` may be NULL.
 */
enum JsrStatus jsr_daubechies_holder(size_t n, double *alpha, double *jsr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JSR_H */
