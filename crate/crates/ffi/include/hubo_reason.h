#ifndef HUBO_REASON_H
#define HUBO_REASON_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  HR_STATUS_OK = 0,
  HR_STATUS_NULL_POINTER = 1,
  HR_STATUS_INVALID_UTF8 = 2,
  HR_STATUS_INVALID_INPUT = 3,
  HR_STATUS_INVALID_CONFIG = 4,
  HR_STATUS_EMPTY_MODEL = 5,
  HR_STATUS_LIMIT_EXCEEDED = 6,
  HR_STATUS_OUT_OF_RANGE = 7,
  HR_STATUS_BUFFER_TOO_SMALL = 8,
  HR_STATUS_PANIC = 9,
} HrStatus;

/**
 * Binary energy model.
 */
typedef struct HrModel HrModel;

/**
 * Solver output: distinct assignments with energies and multiplicities.
 */
typedef struct HrSampleSet HrSampleSet;

/**
 * Annealing schedule. A `t_start` of zero or less selects the automatic
 * starting temperature.
 */
typedef struct {
  double t_start;
  double t_end;
  uint64_t sweeps;
  uint64_t restarts;
  uint64_t seed;
} HrAnnealParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hr_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hr_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hr_string_free(char *s);

/**
 * Creates an empty model over `num_vars` binary variables.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
HrStatus hr_model_new(size_t num_vars, HrModel **out);

/**
 * Parses a model from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
HrStatus hr_model_from_json(const char *json, HrModel **out);

/**
 * Serializes a model. Free the result with [`hr_string_free`].
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
HrStatus hr_model_to_json(const HrModel *model, char **out);

/**
 * Adds `coeff` to the term over `vars[0..len]`. Indices may be unsorted.
 *
 * # Safety
 * `model` must be a live handle; `vars` must point to `len` readable indices.
 */
HrStatus hr_model_add_term(HrModel *model, const size_t *vars, size_t len, double coeff);

/**
 * # Safety
 * `model` must be a live handle or null.
 */
size_t hr_model_num_vars(const HrModel *model);

/**
 * Number of stored nonzero terms.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t hr_model_num_terms(const HrModel *model);

/**
 * Energy of one assignment given as `len` bytes, nonzero meaning set.
 *
 * # Safety
 * `model` must be a live handle; `bits` must point to `len` readable bytes;
 * `energy` must be writable.
 */
HrStatus hr_model_evaluate(const HrModel *model, const uint8_t *bits, size_t len, double *energy);

/**
 * # Safety
 * `model` must be a handle from this library or null, not yet freed.
 */
void hr_model_free(HrModel *model);

/**
 * Default schedule: automatic start temperature, t_end 1e-3, 2000 sweeps, 64 restarts, seed 0.
 */
HrAnnealParams hr_anneal_params_default(void);

/**
 * Simulated annealing. With `reduced` set, anneals the pair-reduced spin
 * form and re-scores on the original model. `params` may be null for defaults.
 *
 * # Safety
 * `model` must be a live handle; `params` null or readable; `out` writable.
 */
HrStatus hr_anneal(const HrModel *model,
                   const HrAnnealParams *params,
                   bool reduced,
                   HrSampleSet **out);

/**
 * Exhaustive search up to `limit` variables. `lowest` of zero returns the
 * ground states only; otherwise the `lowest` lowest assignments plus any
 * ground-state ties.
 *
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
HrStatus hr_brute_force(const HrModel *model, size_t limit, size_t lowest, HrSampleSet **out);

/**
 * Number of distinct samples.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
size_t hr_sampleset_len(const HrSampleSet *set);

/**
 * Assignment length shared by every sample, or 0 for an empty set.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
size_t hr_sampleset_num_vars(const HrSampleSet *set);

/**
 * Copies sample `index`. `bits` receives one byte per variable (1 set,
 * 0 clear) and must hold at least [`hr_sampleset_num_vars`] bytes; it may be
 * null when only the energy and multiplicity are wanted. `energy` and
 * `multiplicity` may also be null.
 *
 * # Safety
 * `set` must be a live handle; non-null output pointers must be writable.
 */
HrStatus hr_sampleset_get(const HrSampleSet *set,
                          size_t index,
                          uint8_t *bits,
                          size_t bits_len,
                          double *energy,
                          uint64_t *multiplicity);

/**
 * Lowest energy in the set.
 *
 * # Safety
 * `set` must be a live handle; `energy` writable.
 */
HrStatus hr_sampleset_min_energy(const HrSampleSet *set, double *energy);

/**
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
HrStatus hr_sampleset_to_json(const HrSampleSet *set, char **out);

/**
 * # Safety
 * `set` must be a handle from this library or null, not yet freed.
 */
void hr_sampleset_free(HrSampleSet *set);

/**
 * Inclusion frequencies over the lowest `quantile` of the multiplicity
 * weighted set. `frequencies` must hold [`hr_sampleset_num_vars`] values.
 * `selected`, when not null, receives 1 for each selected variable under
 * `tau` (or the ground-state support when `ground_state` is set) and 0 otherwise.
 *
 * # Safety
 * `set` must be a live handle; `frequencies` must hold `len` doubles;
 * `selected` null or holding `len` bytes.
 */
HrStatus hr_stability(const HrSampleSet *set,
                      double quantile,
                      double tau,
                      bool ground_state,
                      double *frequencies,
                      uint8_t *selected,
                      size_t len);

/**
 * Full stability report as JSON. Free the result with [`hr_string_free`].
 *
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
HrStatus hr_stability_report_json(const HrSampleSet *set,
                                  double quantile,
                                  double tau,
                                  bool ground_state,
                                  char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HUBO_REASON_H */
