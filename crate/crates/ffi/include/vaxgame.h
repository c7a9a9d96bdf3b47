#ifndef VAXGAME_H
#define VAXGAME_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VgStatus {
  VG_STATUS_OK = 0,
  VG_STATUS_NULL_POINTER = 1,
  VG_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A solver reported instability or another numerical failure.
   */
  VG_STATUS_SOLVER_ERROR = 3,
  VG_STATUS_OUT_OF_RANGE = 4,
  VG_STATUS_IO = 5,
  VG_STATUS_PANIC = 6,
} VgStatus;

/**
 * Simulation settings; create with [`vg_config_new`] or [`vg_config_load`].
 */
typedef struct VgConfig VgConfig;

/**
 * A finished behavioral or social-optimum run.
 */
typedef struct VgRun VgRun;

typedef struct VgState {
  double t;
  double s;
  double v;
  double i;
  double r;
  /**
   * Vaccination rate: `x` for behavioral runs, `u` for optimal-control runs.
   */
  double rate;
} VgState;

typedef struct VgMetrics {
  double it;
  double vt;
  double asp;
  /**
   * Control objective; NaN for behavioral runs.
   */
  double j;
  double horizon;
} VgMetrics;

typedef struct VgComparison {
  struct VgMetrics ne;
  struct VgMetrics so;
  double sed;
  bool ne_converged;
  bool so_converged;
} VgComparison;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated name of a status code.
 */
const char *vg_status_str(enum VgStatus status);

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *vg_last_error(void);

/**
 * Default configuration. Never returns NULL.
 */
struct VgConfig *vg_config_new(void);

/**
 * Loads defaults overlaid with a `key = value` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum VgStatus vg_config_load(const char *path, struct VgConfig **out);

/**
 * # Safety
 * `cfg` must come from this library and not have been freed; NULL is ignored.
 */
void vg_config_free(struct VgConfig *cfg);

/**
 * Sets one config key (same keys and value syntax as config files).
 * Cross-field checks such as the compartments summing to one happen in
 * [`vg_config_validate`] and when a run starts.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum VgStatus vg_config_set(struct VgConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum VgStatus vg_config_validate(const struct VgConfig *cfg);

/**
 * Reads a model parameter (`beta`, `gamma`, `omega`, `eta`, `m`, `c`, `k`,
 * `c_v`, `u_max`).
 *
 * # Safety
 * `cfg` must be a live handle, `name` NUL-terminated and `out` valid.
 */
enum VgStatus vg_config_get_param(const struct VgConfig *cfg, const char *name, double *out);

/**
 * Behavioral run over the configured horizon. Non-convergence is not an
 * error; query it with [`vg_run_converged`].
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum VgStatus vg_ne_run(const struct VgConfig *cfg, struct VgRun **out);

/**
 * Social optimum by forward-backward sweep.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum VgStatus vg_so_run(const struct VgConfig *cfg, struct VgRun **out);

/**
 * # Safety
 * `run` must come from this library and not have been freed; NULL is ignored.
 */
void vg_run_free(struct VgRun *run);

/**
 * Number of grid nodes; 0 for NULL.
 *
 * # Safety
 * `run` must be a live handle or NULL.
 */
size_t vg_run_len(const struct VgRun *run);

/**
 * # Safety
 * `run` must be a live handle or NULL.
 */
bool vg_run_converged(const struct VgRun *run);

/**
 * Sweep iterations for optimal-control runs, 0 for behavioral runs.
 *
 * # Safety
 * `run` must be a live handle or NULL.
 */
size_t vg_run_iterations(const struct VgRun *run);

/**
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum VgStatus vg_run_state(const struct VgRun *run, size_t index, struct VgState *out);

/**
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum VgStatus vg_run_metrics(const struct VgRun *run, struct VgMetrics *out);

/**
 * Runs both models and fills `out` with their metrics and the deficit.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum VgStatus vg_compare(const struct VgConfig *cfg, struct VgComparison *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VAXGAME_H */
