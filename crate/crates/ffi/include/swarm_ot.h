#ifndef SWARM_OT_H
#define SWARM_OT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwarmOtStatus {
  SWARM_OT_STATUS_OK = 0,
  SWARM_OT_STATUS_NULL_POINTER = 1,
  SWARM_OT_STATUS_INVALID_ARGUMENT = 2,
  SWARM_OT_STATUS_INFEASIBLE = 3,
  SWARM_OT_STATUS_NOT_CONVERGED = 4,
  SWARM_OT_STATUS_BUDGET_EXCEEDED = 5,
  SWARM_OT_STATUS_INVALID_EVENT = 6,
  SWARM_OT_STATUS_CODEC = 7,
  SWARM_OT_STATUS_TOO_LARGE = 8,
  SWARM_OT_STATUS_BUFFER_TOO_SMALL = 9,
  SWARM_OT_STATUS_PANIC = 10,
} SwarmOtStatus;

/**
 * A matching-mode problem on a fully connected network.
 */
typedef struct SwarmOtProblem SwarmOtProblem;

/**
 * A warm-started solver that survives events.
 */
typedef struct SwarmOtSolver SwarmOtSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *swarm_ot_last_error(void);

/**
 * Builds a problem from row-major `agents x waypoints` rate matrices.
 *
 * # Safety
 * `gamma` and `delta` must point to `agents * waypoints` doubles; `out`
 * must be writable.
 */
enum SwarmOtStatus swarm_ot_problem_new(size_t agents,
                                        size_t waypoints,
                                        const double *gamma,
                                        const double *delta,
                                        struct SwarmOtProblem **out);

/**
 * # Safety
 * `problem` must come from [`swarm_ot_problem_new`] and not be used again.
 */
void swarm_ot_problem_free(struct SwarmOtProblem *problem);

/**
 * Exhaustive optimum. `assignment` receives one waypoint index per agent.
 *
 * # Safety
 * `assignment` must hold `len` writable entries; `value` must be writable.
 */
enum SwarmOtStatus swarm_ot_brute_force(const struct SwarmOtProblem *problem,
                                        int64_t *assignment,
                                        size_t len,
                                        double *value);

/**
 * Creates a solver on a copy of `problem`.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum SwarmOtStatus swarm_ot_solver_new(const struct SwarmOtProblem *problem,
                                       double eta,
                                       double epsilon,
                                       size_t max_iterations,
                                       struct SwarmOtSolver **out);

/**
 * # Safety
 * `solver` must come from [`swarm_ot_solver_new`] and not be used again.
 */
void swarm_ot_solver_free(struct SwarmOtSolver *solver);

/**
 * One synchronous ADMM round. Writes the primal residual if `residual` is
 * non-null.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum SwarmOtStatus swarm_ot_solver_step(struct SwarmOtSolver *solver, double *residual);

/**
 * Iterates until the current epoch converges (within the per-epoch budget)
 * and records its assignment. Writes the iterations used if `iterations`
 * is non-null; zero if the epoch was already settled.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum SwarmOtStatus swarm_ot_solver_run(struct SwarmOtSolver *solver, size_t *iterations);

/**
 * Assignment extracted from the current plan; `-1` for inactive agents.
 * Fails with `NotConverged` while the residual is above epsilon.
 *
 * # Safety
 * `assignment` must hold `len` writable entries.
 */
enum SwarmOtStatus swarm_ot_solver_assignment(const struct SwarmOtSolver *solver,
                                              int64_t *assignment,
                                              size_t len);

/**
 * Copies the consensus plan, row-major `agents x waypoints`.
 *
 * # Safety
 * `plan` must hold `len` writable doubles.
 */
enum SwarmOtStatus swarm_ot_solver_plan(const struct SwarmOtSolver *solver,
                                        double *plan,
                                        size_t len);

/**
 * `agent` reached its assigned `waypoint`; the waypoint leaves the network.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum SwarmOtStatus swarm_ot_solver_waypoint_reached(struct SwarmOtSolver *solver,
                                                    size_t agent,
                                                    size_t waypoint,
                                                    int32_t reading);

/**
 * # Safety
 * `solver` must be a live handle.
 */
enum SwarmOtStatus swarm_ot_solver_agent_dropout(struct SwarmOtSolver *solver, size_t agent);

/**
 * New rates on one edge; pass NaN to leave a side unchanged.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum SwarmOtStatus swarm_ot_solver_set_rates(struct SwarmOtSolver *solver,
                                             size_t agent,
                                             size_t waypoint,
                                             double gamma,
                                             double delta);

/**
 * Encodes the three-integer waypoint report into 12 bytes.
 *
 * # Safety
 * `out` must hold `len` writable bytes.
 */
enum SwarmOtStatus swarm_ot_encode_message(int32_t agent,
                                           int32_t waypoint,
                                           int32_t reading,
                                           uint8_t *out,
                                           size_t len);

/**
 * # Safety
 * `bytes` must hold `len` readable bytes; the outputs must be writable.
 */
enum SwarmOtStatus swarm_ot_decode_message(const uint8_t *bytes,
                                           size_t len,
                                           int32_t *agent,
                                           int32_t *waypoint,
                                           int32_t *reading);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWARM_OT_H */
