#ifndef HYBRIDPLAN_H
#define HYBRIDPLAN_H

/* Generated by cbindgen from the hybridplan-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Primitive mode argument: keep the scenario's setting.
 */
#define HP_MODE_SCENARIO -1

#define HP_MODE_ND 0

#define HP_MODE_D 1

typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_ARGUMENT = 1,
  HP_STATUS_INVALID_UTF8 = 2,
  HP_STATUS_SYNTAX = 3,
  HP_STATUS_SEMANTIC = 4,
  HP_STATUS_UNREACHABLE_GOAL = 5,
  HP_STATUS_POLICY_MISMATCH = 6,
  HP_STATUS_POLICY_FORMAT = 7,
  HP_STATUS_NUMERIC_FAILURE = 8,
  HP_STATUS_STUCK = 9,
  HP_STATUS_INVALID_ARGUMENT = 10,
  HP_STATUS_IO = 11,
  HP_STATUS_INTERNAL = 12,
} HpStatus;

/**
 * Opaque solved plan.
 */
typedef struct HpPlan HpPlan;

/**
 * Opaque parsed scenario.
 */
typedef struct HpScenario HpScenario;

typedef struct HpPlanStats {
  uint64_t locations;
  uint64_t primitives;
  uint64_t pa_states;
  uint64_t pa_edges;
  uint64_t admissible;
  uint64_t finals;
  /**
   * Offline wall-clock time in seconds.
   */
  double t_total;
} HpPlanStats;

typedef struct HpRunSummary {
  /**
   * 0 reached, 2 not reached, 3 safety violation, 4 numeric failure or stuck.
   */
  int32_t exit_code;
  bool reached;
  /**
   * NaN when the goal was not reached.
   */
  double t_reach;
  double t_end;
  uint64_t transitions;
  uint64_t recoveries;
  uint64_t violations;
} HpRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hp_version(void);

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *hp_last_error_message(void);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HpStatus hp_scenario_parse(const char *json, struct HpScenario **out);

/**
 * # Safety
 * `scenario` must come from `hp_scenario_parse` and not be freed twice.
 */
void hp_scenario_free(struct HpScenario *scenario);

/**
 * Solves a scenario. `mode` is one of the `HP_MODE_*` constants.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum HpStatus hp_plan_build(const struct HpScenario *scenario, int32_t mode, struct HpPlan **out);

/**
 * Reads a policy file produced for `scenario`.
 *
 * # Safety
 * `scenario` must be a live handle, `policy_json` NUL-terminated and `out` valid.
 */
enum HpStatus hp_plan_load(const struct HpScenario *scenario,
                           const char *policy_json,
                           struct HpPlan **out);

/**
 * # Safety
 * `plan` must come from `hp_plan_build`/`hp_plan_load` and not be freed twice.
 */
void hp_plan_free(struct HpPlan *plan);

/**
 * # Safety
 * `plan` must be a live handle and `out` a valid pointer.
 */
enum HpStatus hp_plan_stats(const struct HpPlan *plan, struct HpPlanStats *out);

/**
 * Serializes the policy. Release the string with `hp_string_free`.
 *
 * # Safety
 * `plan` must be a live handle and `out` a valid pointer.
 */
enum HpStatus hp_plan_policy_json(const struct HpPlan *plan, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void hp_string_free(char *s);

/**
 * Model-checks the policy; `certified` receives the verdict.
 *
 * # Safety
 * `plan` must be a live handle and `certified` a valid pointer.
 */
enum HpStatus hp_plan_check(const struct HpPlan *plan, bool *certified);

/**
 * Simulates one run from positions `y` and velocities `v` (each `len`
 * long; `v` may be null for rest). `t_max <= 0` selects the default horizon.
 *
 * # Safety
 * `plan` must be a live handle, `y` (and `v` if non-null) must point to
 * `len` doubles, and `out` must be valid.
 */
enum HpStatus hp_simulate(const struct HpPlan *plan,
                          const double *y,
                          const double *v,
                          size_t len,
                          double t_max,
                          struct HpRunSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRIDPLAN_H */
