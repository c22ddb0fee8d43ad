#ifndef ENTSCALE_H
#define ENTSCALE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_INVALID_ARGUMENT = 1,
  ES_STATUS_INVALID_STATE = 2,
  ES_STATUS_RESOURCE_LIMIT = 3,
  ES_STATUS_CONVERGENCE = 4,
  ES_STATUS_IO = 5,
  ES_STATUS_NULL_POINTER = 6,
  ES_STATUS_PANIC = 7,
} EsStatus;

// An Exact Cover instance with a unique satisfying assignment.
typedef struct EsInstance EsInstance;

// The result of an `s` sweep.
typedef struct EsProfile EsProfile;

// A normalized state vector.
typedef struct EsState EsState;

typedef struct EsSweepRecord {
  double s;
  double e0;
  double e1;
  double gap;
  double entropy;
  double h10;
} EsSweepRecord;

typedef struct EsGroverPoint {
  double e_minus;
  double lambda_plus;
  double lambda_minus;
  double entropy;
} EsGroverPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Free with
// [`es_string_free`].
char *es_last_error_message(void);

// # Safety
// `s` must come from this library and not have been freed.
void es_string_free(char *s);

// Builds a state from `2^n_qubits` real and imaginary parts; the norm must be 1.
//
// # Safety
// `re` and `im` must each point to `len` doubles; `out` must be writable.
enum EsStatus es_state_new(size_t n_qubits,
                           const double *re,
                           const double *im,
                           size_t len,
                           struct EsState **out_state);

// # Safety
// `state` must come from [`es_state_new`] and not have been freed.
void es_state_free(struct EsState *state);

// Entropy in bits of subsystem `mask_a` (0 selects qubits `0..n/2`).
//
// # Safety
// `state` must be a live handle; `out_entropy` must be writable.
enum EsStatus es_state_entropy(const struct EsState *state, uint64_t mask_a, double *out_entropy);

// # Safety
// `state` must be a live handle; `out_rank` must be writable.
enum EsStatus es_state_schmidt_rank(const struct EsState *state,
                                    uint64_t mask_a,
                                    double tol,
                                    size_t *out_rank);

// # Safety
// `out_instance` must be writable.
enum EsStatus es_instance_generate(size_t n_qubits,
                                   size_t arity,
                                   uint64_t seed,
                                   struct EsInstance **out_instance);

// # Safety
// `json` must be a NUL-terminated string; `out_instance` must be writable.
enum EsStatus es_instance_from_json(const char *json, struct EsInstance **out_instance);

// Serialized instance; free the string with [`es_string_free`].
//
// # Safety
// `instance` must be a live handle; `out_json` must be writable.
enum EsStatus es_instance_to_json(const struct EsInstance *instance, char **out_json);

// # Safety
// `instance` must be a live handle; `out_n` must be writable.
enum EsStatus es_instance_n_qubits(const struct EsInstance *instance, size_t *out_n);

// # Safety
// `instance` must come from this library and not have been freed.
void es_instance_free(struct EsInstance *instance);

// Sweeps `s` over `[0, 1]` with spacing `step`; `mask_a` 0 selects qubits `0..n/2`.
//
// # Safety
// `instance` must be a live handle; `out_profile` must be writable.
enum EsStatus es_sweep(const struct EsInstance *instance,
                       double step,
                       uint64_t mask_a,
                       uint64_t seed,
                       struct EsProfile **out_profile);

// # Safety
// `profile` must be a live handle; `out_len` must be writable.
enum EsStatus es_profile_len(const struct EsProfile *profile, size_t *out_len);

// # Safety
// `profile` must be a live handle; `out_record` must be writable.
enum EsStatus es_profile_record(const struct EsProfile *profile,
                                size_t index,
                                struct EsSweepRecord *out_record);

// On-grid locations of the minimum gap and the maximum entropy.
//
// # Safety
// `profile` must be a live handle; both outputs must be writable.
enum EsStatus es_profile_critical_points(const struct EsProfile *profile,
                                         double *out_s_min_gap,
                                         double *out_s_max_entropy);

// # Safety
// `profile` must come from this library and not have been freed.
void es_profile_free(struct EsProfile *profile);

// Two-level Grover ground state at `(n, s)`, `n` even.
//
// # Safety
// `out_point` must be writable.
enum EsStatus es_grover_point(size_t n_qubits, double s, struct EsGroverPoint *out_point);

// Multiplicative order of `a` modulo `modulus`.
//
// # Safety
// `out_order` must be writable.
enum EsStatus es_shor_order(uint64_t a, uint64_t modulus, uint64_t *out_order);

// Entropy and Schmidt rank of the target register in the pre-QFT state.
//
// # Safety
// Both outputs must be writable.
enum EsStatus es_shor_target_entanglement(uint64_t modulus,
                                          uint64_t a,
                                          double *out_entropy,
                                          size_t *out_rank);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTSCALE_H */
