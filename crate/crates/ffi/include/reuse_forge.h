#ifndef REUSE_FORGE_H
#define REUSE_FORGE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the non-zero values match the command-line exit codes.
 */
typedef enum RfStatus {
  RF_STATUS_OK = 0,
  /**
   * The query ran but no method was selected.
   */
  RF_STATUS_NONE_FOUND = 1,
  RF_STATUS_INVALID_ARGUMENT = 2,
  RF_STATUS_IO = 3,
  RF_STATUS_BACKEND = 4,
  RF_STATUS_PARSE = 5,
  RF_STATUS_NULL_POINTER = 6,
  RF_STATUS_PANIC = 7,
} RfStatus;

/**
 * Gateway handle replaying recorded transcripts.
 */
typedef struct RfGateway RfGateway;

/**
 * Method library handle.
 */
typedef struct RfLibrary RfLibrary;

/**
 * Welch two-sample test result.
 */
typedef struct RfWelch {
  double t;
  double df;
  double p_two_tailed;
} RfWelch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *rf_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void rf_string_free(char *s);

/**
 * New empty library; release with [`rf_library_free`].
 */
struct RfLibrary *rf_library_new(void);

/**
 * Loads a JSON-lines library file into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RfStatus rf_library_load(const char *path, struct RfLibrary **out);

/**
 * Writes the library as JSON lines.
 *
 * # Safety
 * `library` must be a live handle; `path` a NUL-terminated string.
 */
enum RfStatus rf_library_save(const struct RfLibrary *library, const char *path);

/**
 * Adds a direct method. `scope_csv` may be null; otherwise it holds
 * comma-separated scope labels.
 *
 * # Safety
 * `library` must be a live handle; the strings NUL-terminated.
 */
enum RfStatus rf_library_add(struct RfLibrary *library,
                             const char *id,
                             const char *question,
                             const char *solution,
                             const char *scope_csv);

/**
 * Number of methods; zero for a null handle.
 *
 * # Safety
 * `library` must be null or a live handle.
 */
uintptr_t rf_library_len(const struct RfLibrary *library);

/**
 * # Safety
 * `library` must be null or a handle not yet freed.
 */
void rf_library_free(struct RfLibrary *library);

/**
 * Opens a gateway that replays the transcript file at `path`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RfStatus rf_gateway_recorded(const char *path, struct RfGateway **out);

/**
 * # Safety
 * `gateway` must be null or a handle not yet freed.
 */
void rf_gateway_free(struct RfGateway *gateway);

/**
 * Runs the reuse pipeline with default settings and writes the outcome
 * as JSON to `*out_json` (free with [`rf_string_free`]). Returns
 * `RF_STATUS_OK` when a method was selected and `RF_STATUS_NONE_FOUND`
 * otherwise; the JSON is written in both cases.
 *
 * # Safety
 * Handles must be live; strings NUL-terminated (`scope_csv` may be
 * null); `out_json` must be writable.
 */
enum RfStatus rf_query(const struct RfGateway *gateway,
                       const struct RfLibrary *library,
                       const char *question,
                       const char *scope_csv,
                       char **out_json);

/**
 * Welch's unequal-variance t-test from summary statistics.
 *
 * # Safety
 * `out` must be writable.
 */
enum RfStatus rf_welch_summary(double mean_a,
                               double sd_a,
                               uintptr_t n_a,
                               double mean_b,
                               double sd_b,
                               uintptr_t n_b,
                               struct RfWelch *out);

/**
 * Cosine similarity of an output text to a reference text under the
 * hashing encoder of dimension `dim`.
 *
 * # Safety
 * Strings must be NUL-terminated; `out` must be writable.
 */
enum RfStatus rf_segment_similarity(const char *output,
                                    const char *reference,
                                    uintptr_t dim,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REUSE_FORGE_H */
