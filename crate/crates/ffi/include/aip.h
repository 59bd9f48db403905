#ifndef AIP_H
#define AIP_H

/* Generated by cbindgen from aip-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/* Opaque handles; create and destroy them only through this API. */
typedef struct AipScene AipScene;
typedef struct AipSolutionSet AipSolutionSet;

/**
 * Result of an API call.
 */
typedef enum AipStatus {
  AIP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  AIP_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  AIP_STATUS_INVALID_UTF8 = 2,
  /**
   * The scene document failed to parse or validate.
   */
  AIP_STATUS_PARSE_ERROR = 3,
  /**
   * The configuration was rejected (bad epsilon or subset cap).
   */
  AIP_STATUS_BAD_CONFIG = 4,
  /**
   * Heuristic 2 is enabled but no object in the scene changed state.
   */
  AIP_STATUS_NO_MOVED_OBJECT = 5,
  /**
   * The solver gave up (per-object force set beyond the subset cap).
   */
  AIP_STATUS_SOLVE_ERROR = 6,
  /**
   * An index was out of range.
   */
  AIP_STATUS_OUT_OF_RANGE = 7,
  /**
   * An internal invariant failed; see `aip_last_error`.
   */
  AIP_STATUS_INTERNAL_ERROR = 8,
} AipStatus;

/**
 * Solver options in C layout. `max_solutions == 0` means unlimited.
 */
typedef struct AipSolveOptions {
  /**
   * Cancel-only combination for forces assigned during the search.
   */
  bool use_h1;
  /**
   * Hypothesize actions only on objects that moved.
   */
  bool use_h2;
  /**
   * Cap on per-object force sets; must be at least 1.
   */
  uint32_t subset_cap;
  uint64_t max_solutions;
} AipSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default solver options: both heuristics on, subset cap 12, unlimited
 * solutions.
 */
struct AipSolveOptions aip_solve_options_default(void);

/**
 * Parses and validates a scene document (format "aip-scene/1"); numeric
 * geometry is quantized with the given dead-band. On success writes a new
 * handle to `out`; free it with [`aip_scene_free`].
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum AipStatus aip_scene_parse(const char *json, double epsilon, AipScene **out);

/**
 * Releases a scene handle. Null is ignored.
 *
 * # Safety
 * `scene` must have come from [`aip_scene_parse`] and not been freed.
 */
void aip_scene_free(AipScene *scene);

/**
 * Number of objects in a parsed scene (0 for null).
 *
 * # Safety
 * `scene` must be null or a live handle from [`aip_scene_parse`].
 */
uintptr_t aip_scene_object_count(const AipScene *scene);

/**
 * Number of contact points in a parsed scene (0 for null).
 *
 * # Safety
 * `scene` must be null or a live handle from [`aip_scene_parse`].
 */
uintptr_t aip_scene_contact_count(const AipScene *scene);

/**
 * Runs the inference. On success writes a solution-set handle to `out`;
 * free it with [`aip_solution_set_free`].
 *
 * # Safety
 * All pointers must be valid; `scene` must be a live scene handle.
 */
enum AipStatus aip_solve(const AipScene *scene,
                         const struct AipSolveOptions *options,
                         AipSolutionSet **out);

/**
 * Releases a solution-set handle. Null is ignored.
 *
 * # Safety
 * `set` must have come from [`aip_solve`] and not been freed.
 */
void aip_solution_set_free(AipSolutionSet *set);

/**
 * Number of solutions in a set (0 for null).
 *
 * # Safety
 * `set` must be null or a live handle from [`aip_solve`].
 */
uintptr_t aip_solution_count(const AipSolutionSet *set);

/**
 * Human-readable action of one solution ("push object ... in direction
 * ... at locus ..."). The string must be freed with [`aip_string_free`].
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum AipStatus aip_solution_action(const AipSolutionSet *set, uintptr_t index, char **out);

/**
 * One solution as JSON (action, grouped assignments, derivation trace).
 * The string must be freed with [`aip_string_free`].
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum AipStatus aip_solution_json(const AipSolutionSet *set, uintptr_t index, char **out);

/**
 * The whole run as a report document (scene digest, configuration echo,
 * solutions with traces). The string must be freed with
 * [`aip_string_free`].
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum AipStatus aip_report_json(const AipSolutionSet *set, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must have been returned by this library and not been freed.
 */
void aip_string_free(char *s);

/**
 * Static description of a status code.
 */
const char *aip_status_message(enum AipStatus status);

/**
 * Detail message of the most recent failure on this thread, or null. The
 * string must be freed with [`aip_string_free`].
 */
char *aip_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIP_H */
