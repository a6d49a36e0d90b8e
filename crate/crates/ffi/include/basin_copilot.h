#ifndef BASIN_COPILOT_H
#define BASIN_COPILOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all functions.
 */
typedef enum BcStatus {
  BC_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  BC_STATUS_NULL_ARGUMENT = 1,
  BC_STATUS_INVALID_UTF8 = 2,
  BC_STATUS_INVALID_JSON = 3,
  /**
   * Unknown session id.
   */
  BC_STATUS_NOT_FOUND = 4,
  /**
   * Arguments were well formed but rejected (empty message, unknown option, ...).
   */
  BC_STATUS_INVALID_INPUT = 5,
  /**
   * The chat, embedding or judge provider failed.
   */
  BC_STATUS_PROVIDER = 6,
  /**
   * Config, index or dataset could not be loaded.
   */
  BC_STATUS_STARTUP = 7,
  BC_STATUS_IO = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  BC_STATUS_PANIC = 9,
} BcStatus;

/**
 * Opaque engine handle.
 */
typedef struct BcEngine BcEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens an engine from a TOML config file. On success `*out` holds a
 * handle to release with [`bc_engine_close`].
 *
 * # Safety
 * `config_path` is a NUL-terminated string; `out` is valid for a write.
 */
enum BcStatus bc_engine_open(const char *config_path, struct BcEngine **out);

/**
 * Releases an engine handle. NULL is ignored.
 *
 * # Safety
 * `engine` is NULL or a handle from [`bc_engine_open`] not yet closed.
 */
void bc_engine_close(struct BcEngine *engine);

/**
 * Creates a session; `session_id` may be NULL for a generated id. Writes
 * `{"session_id", "created_at"}`.
 *
 * # Safety
 * Pointers are NULL or valid as documented on the module.
 */
enum BcStatus bc_session_create(const struct BcEngine *engine,
                                const char *session_id,
                                char **out_json);

/**
 * Sends one user message and writes the answer JSON, the same document the
 * HTTP gateway returns. `option` may be NULL.
 *
 * # Safety
 * Pointers are NULL or valid as documented on the module.
 */
enum BcStatus bc_session_send(const struct BcEngine *engine,
                              const char *session_id,
                              const char *text,
                              const char *option,
                              char **out_json);

/**
 * Writes the session transcript JSON.
 *
 * # Safety
 * Pointers are NULL or valid as documented on the module.
 */
enum BcStatus bc_session_transcript(const struct BcEngine *engine,
                                    const char *session_id,
                                    char **out_json);

/**
 * Writes the tool descriptors as a JSON array of function schemas.
 *
 * # Safety
 * Pointers are NULL or valid as documented on the module.
 */
enum BcStatus bc_engine_tools(const struct BcEngine *engine, char **out_json);

/**
 * Scores a JSON array of evaluation samples with the engine's judge and
 * embedder and writes the metric report JSON.
 *
 * # Safety
 * Pointers are NULL or valid as documented on the module.
 */
enum BcStatus bc_evaluate(const struct BcEngine *engine, const char *samples_json, char **out_json);

/**
 * Harmonic mean of four metric means (faithfulness, answer relevancy,
 * context precision, context recall). Non-positive inputs give 0.
 *
 * # Safety
 * `means` points to four doubles; `out` is valid for a write.
 */
enum BcStatus bc_ragas_score(const double *means, double *out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` is NULL or a string returned through an `out_json` argument and not
 * yet freed.
 */
void bc_string_free(char *s);

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful call. Valid until the next call on the same thread.
 */
const char *bc_last_error(void);

/**
 * Library version as a static string.
 */
const char *bc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BASIN_COPILOT_H */
