#ifndef RDLLF_H
#define RDLLF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RdllfStatus {
  RDLLF_STATUS_OK = 0,
  RDLLF_STATUS_NULL_POINTER = 1,
  RDLLF_STATUS_INVALID_ARGUMENT = 2,
  RDLLF_STATUS_CONFIG = 3,
  RDLLF_STATUS_LLF_REFUTED = 4,
  RDLLF_STATUS_LLF_INCONCLUSIVE = 5,
  RDLLF_STATUS_BOUNDS_OVERFLOW = 6,
  RDLLF_STATUS_SIMULATION = 7,
  RDLLF_STATUS_BUFFER_TOO_SMALL = 8,
  RDLLF_STATUS_PANIC = 9,
} RdllfStatus;

typedef enum RdllfTermination {
  RDLLF_TERMINATION_COMPLETED = 0,
  RDLLF_TERMINATION_BLOW_UP_DETECTED = 1,
  RDLLF_TERMINATION_POSITIVITY_VIOLATION = 2,
  RDLLF_TERMINATION_STEP_FAILURE = 3,
} RdllfTermination;

/**
 * A computed constant ledger.
 */
typedef struct RdllfLedger RdllfLedger;

/**
 * A configured system.
 */
typedef struct RdllfSystem RdllfSystem;

/**
 * A recorded trajectory.
 */
typedef struct RdllfTrajectory RdllfTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rdllf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rdllf_version(void);

/**
 * Builds a system from configuration text in the `key = value` format.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RdllfStatus rdllf_system_new(const char *config, struct RdllfSystem **out);

/**
 * # Safety
 * `sys` must come from [`rdllf_system_new`] or be null.
 */
void rdllf_system_free(struct RdllfSystem *sys);

/**
 * Number of compartments, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be a live handle or null.
 */
size_t rdllf_system_compartments(const struct RdllfSystem *sys);

/**
 * Verifies the configured LLF candidate and computes the constant ledger.
 *
 * # Safety
 * `sys` must be a live handle and `out` a valid pointer.
 */
enum RdllfStatus rdllf_ledger_compute(const struct RdllfSystem *sys, struct RdllfLedger **out);

/**
 * Reads one flat ledger field, e.g. `"B"` or `"G_u_1"`.
 *
 * # Safety
 * `ledger` must be a live handle, `field` a NUL-terminated string and
 * `value` a valid pointer.
 */
enum RdllfStatus rdllf_ledger_get(const struct RdllfLedger *ledger,
                                  const char *field,
                                  double *value);

/**
 * The ledger as a JSON object; owned by the handle.
 *
 * # Safety
 * `ledger` must be a live handle or null.
 */
const char *rdllf_ledger_json(const struct RdllfLedger *ledger);

/**
 * # Safety
 * `ledger` must come from [`rdllf_ledger_compute`] or be null.
 */
void rdllf_ledger_free(struct RdllfLedger *ledger);

/**
 * Integrates the system with fixed step `dt` up to `t_end`, recording a
 * state every `record_every` (a multiple of `dt`).
 *
 * # Safety
 * `sys` must be a live handle and `out` a valid pointer.
 */
enum RdllfStatus rdllf_simulate(const struct RdllfSystem *sys,
                                double t_end,
                                double dt,
                                double record_every,
                                struct RdllfTrajectory **out);

/**
 * # Safety
 * `traj` must be a live handle.
 */
enum RdllfTermination rdllf_trajectory_termination(const struct RdllfTrajectory *traj);

/**
 * Number of recorded states, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be a live handle or null.
 */
size_t rdllf_trajectory_len(const struct RdllfTrajectory *traj);

/**
 * Largest `u_i + v_i` over the recorded states; NaN for a null handle.
 *
 * # Safety
 * `traj` must be a live handle or null.
 */
double rdllf_trajectory_max_norm(const struct RdllfTrajectory *traj);

/**
 * Copies recorded state `index` into `u` and `v`, each of length `n`.
 *
 * # Safety
 * `traj` must be a live handle; `t` must be valid and `u`, `v` must point
 * to at least `n` doubles.
 */
enum RdllfStatus rdllf_trajectory_state(const struct RdllfTrajectory *traj,
                                        size_t index,
                                        double *t,
                                        double *u,
                                        double *v,
                                        size_t n);

/**
 * # Safety
 * `traj` must come from [`rdllf_simulate`] or be null.
 */
void rdllf_trajectory_free(struct RdllfTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDLLF_H */
