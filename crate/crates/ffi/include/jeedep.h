/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef JEEDEP_H
#define JEEDEP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define JEEDEP_FORMAT_JSON 0

#define JEEDEP_FORMAT_DOT 1

#define JEEDEP_FORMAT_SUMMARY 2

/**
 * Result code of every fallible call.
 */
typedef enum JeedepStatus {
  JEEDEP_STATUS_OK = 0,
  JEEDEP_STATUS_NULL_ARGUMENT = 1,
  JEEDEP_STATUS_INVALID_UTF8 = 2,
  JEEDEP_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The root is missing, not a directory or unreadable.
   */
  JEEDEP_STATUS_IO = 4,
  /**
   * A graph document could not be parsed.
   */
  JEEDEP_STATUS_PARSE = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  JEEDEP_STATUS_PANIC = 6,
} JeedepStatus;

/**
 * Opaque analysis result.
 */
typedef struct JeedepGraph JeedepGraph;

/**
 * Analysis settings. Obtain defaults from `jeedep_options_default`.
 */
typedef struct JeedepOptions {
  /**
   * Context path stripped from absolute URLs, or NULL.
   */
  const char *context_path;
  bool case_insensitive_extensions;
  bool include_unresolved;
  bool follow_symlinks;
  bool parallel;
} JeedepOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default options: unresolved edges kept, parallel scanning, symlinks not followed.
 */
struct JeedepOptions jeedep_options_default(void);

/**
 * Analyzes the application rooted at `root`. `options` may be NULL for
 * defaults. On success `*out` receives a new graph handle.
 *
 * # Safety
 * `root` must be a NUL-terminated string, `options` NULL or valid, and `out`
 * a writable pointer.
 */
enum JeedepStatus jeedep_analyze(const char *root,
                                 const struct JeedepOptions *options,
                                 struct JeedepGraph **out);

/**
 * Builds a graph from a JSON document produced by `jeedep_graph_render`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum JeedepStatus jeedep_graph_from_json(const char *json, struct JeedepGraph **out);

/**
 * Renders `graph` as JSON, DOT or a summary table (`JEEDEP_FORMAT_*`).
 * On success `*out` receives a string to release with `jeedep_string_free`.
 *
 * # Safety
 * `graph` must be a live handle and `out` a writable pointer.
 */
enum JeedepStatus jeedep_graph_render(const struct JeedepGraph *graph, uint32_t format, char **out);

/**
 * Number of artifacts, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t jeedep_graph_artifact_count(const struct JeedepGraph *graph);

/**
 * Number of edges, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t jeedep_graph_edge_count(const struct JeedepGraph *graph);

/**
 * Number of edges to unresolved URLs or beans, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t jeedep_graph_unresolved_count(const struct JeedepGraph *graph);

/**
 * Number of diagnostics of any severity, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t jeedep_graph_diagnostic_count(const struct JeedepGraph *graph);

/**
 * Number of error diagnostics, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t jeedep_graph_error_count(const struct JeedepGraph *graph);

/**
 * Releases a graph handle. NULL is ignored.
 *
 * # Safety
 * `graph` must be NULL or a handle not yet freed.
 */
void jeedep_graph_free(struct JeedepGraph *graph);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void jeedep_string_free(char *s);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *jeedep_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *jeedep_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JEEDEP_H */
