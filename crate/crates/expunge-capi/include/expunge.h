/* C interface to the expunge certificate library.
 *
 * Conventions:
 *   - Handles are opaque; release certificates with
 *     expunge_certificate_free and returned strings with
 *     expunge_string_free.
 *   - Every fallible function returns an expunge_status; out-parameters
 *     are written only on EXPUNGE_OK.
 *   - expunge_last_error describes the most recent failure on the calling
 *     thread; the pointer stays valid until the next library call from
 *     that thread.
 *   - Panics never unwind across the boundary; they surface as
 *     EXPUNGE_ERR_PANIC.
 *
 * This header is maintained by hand and mirrors src/lib.rs; a repository
 * test checks that the two declare the same symbols.
 */

#ifndef EXPUNGE_H
#define EXPUNGE_H

#include <stdbool.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible function. */
typedef enum expunge_status {
  /* The call succeeded (for verification: the certificate is valid). */
  EXPUNGE_OK = 0,
  /* Invalid input: parameters out of scope, malformed JSON, or data that
   * fails validation. */
  EXPUNGE_ERR_INVALID_INPUT = 1,
  /* The search ran to completion without finding a certificate. */
  EXPUNGE_ERR_NOT_FOUND = 2,
  /* The search stopped because its time budget ran out. */
  EXPUNGE_ERR_BUDGET = 3,
  /* The certificate replayed but failed verification. */
  EXPUNGE_ERR_VERIFY = 4,
  /* A required pointer argument was null. */
  EXPUNGE_ERR_NULL = 5,
  /* A string argument was not valid UTF-8. */
  EXPUNGE_ERR_UTF8 = 6,
  /* An internal panic was caught at the boundary. */
  EXPUNGE_ERR_PANIC = 7,
} expunge_status;

/* Opaque certificate handle. */
typedef struct expunge_certificate expunge_certificate;

/* Library version as a static NUL-terminated string; do not free. */
const char *expunge_version(void);

/* Message describing the most recent failure on this thread, or an empty
 * string when the last call succeeded; do not free. */
const char *expunge_last_error(void);

/* Build a certificate for the case (g, r, d, m) using the construction
 * drivers, searching for at most budget_seconds where no closed form
 * applies. On success writes a new handle to out. */
expunge_status expunge_certify(int64_t g, int64_t r, int64_t d, int64_t m,
                               double budget_seconds,
                               expunge_certificate **out);

/* Parse a certificate from a NUL-terminated JSON string. On success
 * writes a new handle to out. */
expunge_status expunge_certificate_from_json(const char *json,
                                             expunge_certificate **out);

/* Serialize a certificate to JSON. On success writes a NUL-terminated
 * string to out; release it with expunge_string_free. */
expunge_status expunge_certificate_to_json(const expunge_certificate *cert,
                                           char **out);

/* Number of rows the certificate eliminates (its N). */
expunge_status expunge_certificate_n(const expunge_certificate *cert,
                                     uint64_t *out);

/* Case parameters of a certificate. Each out-pointer may be null to skip
 * that field. */
expunge_status expunge_certificate_case(const expunge_certificate *cert,
                                        int64_t *g, int64_t *r, int64_t *d,
                                        int64_t *m);

/* Replay a certificate against freshly built tables: EXPUNGE_OK when it
 * verifies, EXPUNGE_ERR_VERIFY (with the failure in expunge_last_error)
 * when it does not. strict_vi requires Rule VI pairs to appear in both
 * compared columns. */
expunge_status expunge_certificate_verify(const expunge_certificate *cert,
                                          bool strict_vi);

/* Release a certificate handle. Null is ignored; a handle must not be
 * used after it is freed. */
void expunge_certificate_free(expunge_certificate *cert);

/* Release a string returned through a char ** out-parameter. Null is
 * ignored. */
void expunge_string_free(char *s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EXPUNGE_H */
