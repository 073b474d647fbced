#ifndef QCHAIN_H
#define QCHAIN_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from qchain-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for fallible calls.
 */
typedef enum QchainStatus {
  /**
   * Success.
   */
  QCHAIN_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QCHAIN_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  QCHAIN_STATUS_INVALID_UTF8 = 2,
  /**
   * The config failed to parse or violated a precondition.
   */
  QCHAIN_STATUS_INVALID_CONFIG = 3,
  /**
   * Invariant failure inside the library.
   */
  QCHAIN_STATUS_INTERNAL = 4,
} QchainStatus;

/**
 * Opaque scenario report handle.
 */
typedef struct QchainReport QchainReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *qchain_last_error(void);

/**
 * Library version as a static null-terminated string; do not free.
 */
const char *qchain_version(void);

/**
 * Run a scenario described by a JSON config document.
 *
 * On `Ok`, `*out_report` owns the report and must be released with
 * `qchain_report_free`. On any other status, `*out_report` is set to null
 * and `qchain_last_error` describes the problem.
 *
 * # Safety
 * `config_json` must point to a null-terminated string and `out_report`
 * to writable pointer storage; both must stay valid for the call.
 */
enum QchainStatus qchain_run_scenario(const char *config_json, struct QchainReport **out_report);

/**
 * Canonical JSON encoding of a report; release with `qchain_string_free`.
 *
 * # Safety
 * `report` must be a live handle from `qchain_run_scenario` and `out_str`
 * writable pointer storage.
 */
enum QchainStatus qchain_report_json(const struct QchainReport *report, char **out_str);

/**
 * Human-readable table encoding; release with `qchain_string_free`.
 *
 * # Safety
 * Same contract as [`qchain_report_json`].
 */
enum QchainStatus qchain_report_text(const struct QchainReport *report, char **out_str);

/**
 * Whether every built-in expectation held for this run.
 *
 * # Safety
 * `report` must be a live handle and `out_passed` writable.
 */
enum QchainStatus qchain_report_passed(const struct QchainReport *report, bool *out_passed);

/**
 * Release a report handle. Null is ignored.
 *
 * # Safety
 * `report` must come from `qchain_run_scenario` and not be freed twice.
 */
void qchain_report_free(struct QchainReport *report);

/**
 * Release a string produced by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from a `qchain_*` function that transfers string ownership.
 */
void qchain_string_free(char *s);

/**
 * SHA-256 of `len` bytes at `data` into the 32-byte buffer `out_digest`.
 *
 * # Safety
 * `data` must be readable for `len` bytes (null is allowed when `len` is 0)
 * and `out_digest` writable for 32 bytes.
 */
enum QchainStatus qchain_sha256(const uint8_t *data, size_t len, uint8_t *out_digest);

/**
 * Closed-form probability that an attacker with power share `attacker_share`
 * erases a `deficit`-block head start. NaN when the share is outside (0, 1).
 */
double qchain_catchup_probability(double attacker_share, uint32_t deficit);

/**
 * Grover success probability `sin^2((2k+1) * asin(sqrt(M/N)))`. NaN unless
 * `1 <= marked <= space`.
 */
double qchain_grover_success_probability(uint64_t space, uint64_t marked, uint64_t iterations);

/**
 * Optimal Grover iteration count for `marked` solutions among `space`
 * indices. `UINT64_MAX` unless `1 <= marked <= space`.
 */
uint64_t qchain_grover_optimal_iterations(uint64_t space, uint64_t marked);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCHAIN_H */
