#ifndef CAPGUARD_H
#define CAPGUARD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Task mode reported for a tick.
typedef enum CgMode {
  CG_MODE_CA_TRACK = 0,
  CG_MODE_CA_HOLD = 1,
  CG_MODE_WORK = 2,
  CG_MODE_COMPLETE = 3,
} CgMode;

// Result codes. Zero is success.
typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_ARGUMENT = 2,
  CG_STATUS_IO = 3,
  CG_STATUS_PARSE = 4,
  CG_STATUS_INVALID_SCENARIO = 5,
  CG_STATUS_INVALID_MODEL = 6,
  CG_STATUS_INVALID_PARAM = 7,
  CG_STATUS_GEOMETRY = 8,
  CG_STATUS_CONTROL = 9,
  CG_STATUS_PANIC = 10,
} CgStatus;

// Opaque simulation handle.
typedef struct CgSimulation CgSimulation;

// State recorded on one tick.
typedef struct CgTickState {
  double t;
  double q[7];
  double qdot_cmd[7];
  double p_e[3];
  double p_g[3];
  double d_min;
  double v_rel;
  double v_rep_mod;
  double gamma;
  double beta;
  enum CgMode mode;
  // 1 when the human was inside the safety zone.
  int32_t in_zone;
} CgTickState;

// Metrics of a completed run.
typedef struct CgRunSummary {
  size_t ticks;
  double min_d_min;
  double min_d_min_t;
  double max_eef_accel;
  // NaN when the task did not complete.
  double completion_time;
  double final_error;
  size_t violations;
} CgRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cg_version(void);

// Copy of the last error message on this thread, or NULL if none.
// Release with `cg_string_free`.
char *cg_last_error_message(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cg_string_free(char *s);

// Loads a scenario file and creates a simulation.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum CgStatus cg_simulation_from_file(const char *path, struct CgSimulation **out);

// Creates a simulation from scenario JSON text. A relative robot model
// path is resolved against the working directory.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CgStatus cg_simulation_from_json(const char *json, struct CgSimulation **out);

// Destroys a simulation. NULL is ignored.
//
// # Safety
// `sim` must come from `cg_simulation_from_*` and not have been freed.
void cg_simulation_free(struct CgSimulation *sim);

// Number of ticks covering the scenario duration.
//
// # Safety
// `sim` must be a live handle or NULL (returns 0).
size_t cg_simulation_tick_count(const struct CgSimulation *sim);

// Advances one tick and optionally reports its state.
//
// # Safety
// `sim` must be a live handle; `state` may be NULL or writable.
enum CgStatus cg_simulation_step(struct CgSimulation *sim, struct CgTickState *state);

// Runs the remaining ticks and reports the metrics.
//
// # Safety
// `sim` must be a live handle; `summary` may be NULL or writable.
enum CgStatus cg_simulation_run(struct CgSimulation *sim, struct CgRunSummary *summary);

// Changes one controller parameter. Rejected values leave the simulation
// unchanged.
//
// # Safety
// `sim` must be a live handle; `name` a NUL-terminated string.
enum CgStatus cg_simulation_set_param(struct CgSimulation *sim, const char *name, double value);

// Steers a capsule of a live human toward endpoints `a` and `b` (3 doubles
// each). The speed actually used is written to `speed_out` when non-NULL.
//
// # Safety
// `sim` must be a live handle, `id` a NUL-terminated string, `a` and `b`
// point to 3 doubles, `speed_out` NULL or writable.
enum CgStatus cg_simulation_set_human_target(struct CgSimulation *sim,
                                             const char *id,
                                             const double *a,
                                             const double *b,
                                             double max_speed,
                                             double *speed_out);

// Returns the simulation to its initial state and parameters.
//
// # Safety
// `sim` must be a live handle.
enum CgStatus cg_simulation_reset(struct CgSimulation *sim);

// Signed clearance between capsule `a0`-`a1` (radius `ra`) and capsule
// `b0`-`b1` (radius `rb`); negative on overlap. Witness points are written
// to `wa` and `wb` (3 doubles each) when non-NULL.
//
// # Safety
// Point arguments must reference 3 doubles; `d_out` must be writable.
enum CgStatus cg_capsule_distance(const double *a0,
                                  const double *a1,
                                  double ra,
                                  const double *b0,
                                  const double *b1,
                                  double rb,
                                  double *d_out,
                                  double *wa,
                                  double *wb);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPGUARD_H */
