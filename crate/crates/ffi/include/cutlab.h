/* Generated from the cutlab-ffi crate. Do not edit. */

#ifndef CUTLAB_H
#define CUTLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CutlabStatus {
  CUTLAB_STATUS_OK = 0,
  CUTLAB_STATUS_NULL_POINTER = 1,
  CUTLAB_STATUS_INVALID_ARGUMENT = 2,
  CUTLAB_STATUS_INVALID_INSTANCE = 3,
  CUTLAB_STATUS_BUFFER_TOO_SMALL = 4,
  CUTLAB_STATUS_IO = 5,
  CUTLAB_STATUS_INTERNAL = 6,
} CutlabStatus;

/**
 * Breakpoints `(h_j, F(h_j))` of a Pac-Man function.
 */
typedef struct CutlabFunction CutlabFunction;

/**
 * A labelled tree with its cut schedule.
 */
typedef struct CutlabInstance CutlabInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *cutlab_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void cutlab_string_free(char *s);

/**
 * Samples a uniform labelled tree on `n` vertices with a cut schedule;
 * `exponential` selects exponential clocks over ranks.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CutlabStatus cutlab_instance_generate(size_t n,
                                           bool exponential,
                                           uint64_t seed,
                                           struct CutlabInstance **out);

/**
 * Parses an instance from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CutlabStatus cutlab_instance_from_json(const char *json, struct CutlabInstance **out);

/**
 * Serializes an instance; release the string with [`cutlab_string_free`].
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum CutlabStatus cutlab_instance_to_json(const struct CutlabInstance *inst, char **out);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t cutlab_instance_vertex_count(const struct CutlabInstance *inst);

/**
 * Releases an instance.
 *
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void cutlab_instance_free(struct CutlabInstance *inst);

/**
 * Fragment masses at time `t`, largest first. `*len_out` receives the
 * count even when `cap` is too small.
 *
 * # Safety
 * `inst` must be a live handle, `buf` must hold `cap` doubles and
 * `len_out` must be valid.
 */
enum CutlabStatus cutlab_component_masses(const struct CutlabInstance *inst,
                                          double t,
                                          double *buf,
                                          size_t cap,
                                          size_t *len_out);

/**
 * Builds the cut-tree of `inst` and its Pac-Man function.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum CutlabStatus cutlab_bertoin_function(const struct CutlabInstance *inst,
                                          struct CutlabFunction **out);

/**
 * Number of breakpoints, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t cutlab_function_len(const struct CutlabFunction *f);

/**
 * Copies abscissae into `h` and values into `values`, each of capacity
 * `cap`.
 *
 * # Safety
 * `f` must be a live handle, `h` and `values` must hold `cap` doubles and
 * `len_out` must be valid.
 */
enum CutlabStatus cutlab_function_points(const struct CutlabFunction *f,
                                         double *h,
                                         double *values,
                                         size_t cap,
                                         size_t *len_out);

/**
 * Excursion lengths of `F(h) - t h` above its running minimum, in order.
 *
 * # Safety
 * `f` must be a live handle, `buf` must hold `cap` doubles and `len_out`
 * must be valid.
 */
enum CutlabStatus cutlab_excursion_lengths(const struct CutlabFunction *f,
                                           double t,
                                           double *buf,
                                           size_t cap,
                                           size_t *len_out);

/**
 * Releases a function.
 *
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void cutlab_function_free(struct CutlabFunction *f);

/**
 * Runs a named experiment from a JSON configuration such as
 * `{"experiment": "prim-figure", "seed": 1}`. The report JSON goes to
 * `report_out` and the overall verdict to `pass_out`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report_out` and
 * `pass_out` must be valid pointers.
 */
enum CutlabStatus cutlab_run_suite(const char *config_json, char **report_out, bool *pass_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUTLAB_H */
