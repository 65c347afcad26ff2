#ifndef SURFNET_H
#define SURFNET_H

/* Generated by cbindgen from surfnet-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call. Values above `OK` mirror the CLI
 * exit codes where one exists.
 */
typedef enum SurfnetStatus {
  SURFNET_STATUS_OK = 0,
  /**
   * Null pointer, non-UTF-8 string, or out-of-range index.
   */
  SURFNET_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input could not be read or parsed.
   */
  SURFNET_STATUS_INPUT = 2,
  /**
   * Configuration is invalid.
   */
  SURFNET_STATUS_CONFIG = 3,
  /**
   * Internal invariant violation.
   */
  SURFNET_STATUS_INTERNAL = 4,
  /**
   * A panic was caught at the boundary.
   */
  SURFNET_STATUS_PANIC = 5,
} SurfnetStatus;

/**
 * Opaque handle to a completed pipeline run.
 */
typedef struct SurfnetRun SurfnetRun;

/**
 * Per-window graph indices. Ratios that are undefined for the window
 * (zero denominators) are NaN.
 */
typedef struct SurfnetIndices {
  uint64_t v;
  uint64_t e;
  uint64_t p;
  double l_km;
  double sa_km2;
  int64_t mu;
  int64_t euler_check;
  double nd;
  double alpha;
  double beta;
  double gamma;
  double eta;
  double theta;
} SurfnetIndices;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Run the pipeline described by a TOML config file. On success writes a
 * new handle to `out_run`; free it with [`surfnet_run_free`].
 *
 * # Safety
 * `config_path` must be a NUL-terminated string and `out_run` a valid
 * pointer-to-pointer; both must stay valid for the duration of the call.
 */
enum SurfnetStatus surfnet_run_config_file(const char *config_path, struct SurfnetRun **out_run);

/**
 * Run the bandwidth sweep described by a TOML config file. On success,
 * optionally returns the summary CSV path via `out_summary_path` (free
 * with [`surfnet_string_free`]).
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_summary_path` may
 * be null or must be valid for writes.
 */
enum SurfnetStatus surfnet_sweep_config_file(const char *config_path, char **out_summary_path);

/**
 * Render the complexity and connectivity SVG panels from an indices CSV.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings valid for the call.
 */
enum SurfnetStatus surfnet_chart_csv(const char *indices_csv_path, const char *out_dir);

/**
 * Number of regions in a completed run; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a handle from [`surfnet_run_config_file`].
 */
size_t surfnet_run_region_count(const struct SurfnetRun *run);

/**
 * Name of one region as a newly allocated string (free with
 * [`surfnet_string_free`]); null when out of range.
 *
 * # Safety
 * `run` must be null or a handle from [`surfnet_run_config_file`].
 */
char *surfnet_run_region_name(const struct SurfnetRun *run, size_t region_index);

/**
 * Number of time windows in one region of a completed run.
 *
 * # Safety
 * `run` must be null or a handle from [`surfnet_run_config_file`].
 */
size_t surfnet_run_window_count(const struct SurfnetRun *run, size_t region_index);

/**
 * Graph indices of one window. Undefined ratios are NaN.
 *
 * # Safety
 * `run` must be a handle from [`surfnet_run_config_file`] and `out` a
 * valid pointer.
 */
enum SurfnetStatus surfnet_run_indices(const struct SurfnetRun *run,
                                       size_t region_index,
                                       size_t window_index,
                                       struct SurfnetIndices *out);

/**
 * Path of the run manifest as a newly allocated string (free with
 * [`surfnet_string_free`]); null for a null handle.
 *
 * # Safety
 * `run` must be null or a handle from [`surfnet_run_config_file`].
 */
char *surfnet_run_manifest_path(const struct SurfnetRun *run);

/**
 * Free a run handle. Null is a no-op.
 *
 * # Safety
 * `run` must be null or a handle from [`surfnet_run_config_file`] that
 * has not been freed yet.
 */
void surfnet_run_free(struct SurfnetRun *run);

/**
 * Free a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string allocated by this library that has not
 * been freed yet.
 */
void surfnet_string_free(char *s);

/**
 * Message of the last error on this thread as a newly allocated string
 * (free with [`surfnet_string_free`]); null when the last call succeeded.
 */
char *surfnet_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFNET_H */
