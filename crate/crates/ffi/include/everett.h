#ifndef EVERETT_H
#define EVERETT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EverettStatus {
  EVERETT_STATUS_OK = 0,
  EVERETT_STATUS_NULL_POINTER = 1,
  EVERETT_STATUS_INVALID_ARGUMENT = 2,
  EVERETT_STATUS_ZERO_VECTOR = 3,
  EVERETT_STATUS_LABEL_ERROR = 4,
  EVERETT_STATUS_BASIS_COVERAGE = 5,
  EVERETT_STATUS_PARTITION_ERROR = 6,
  EVERETT_STATUS_HISTORY_DEPTH = 7,
  EVERETT_STATUS_SIZE_GUARD = 8,
  EVERETT_STATUS_INVALID_CLASS = 9,
  // No unitary operator satisfies the requested recording rule.
  EVERETT_STATUS_OBSTRUCTION = 10,
  EVERETT_STATUS_BUFFER_TOO_SMALL = 11,
  EVERETT_STATUS_PANIC = 99,
} EverettStatus;

typedef enum EverettCat {
  EVERETT_CAT_LIVE = 0,
  EVERETT_CAT_DEAD = 1,
} EverettCat;

typedef enum EverettCatRecord {
  EVERETT_CAT_RECORD_BLANK = 0,
  EVERETT_CAT_RECORD_REC_LIVE = 1,
  EVERETT_CAT_RECORD_REC_DEAD = 2,
  EVERETT_CAT_RECORD_REC_PLUS = 3,
  EVERETT_CAT_RECORD_REC_MINUS = 4,
} EverettCatRecord;

// Normalized outcome coefficients `C_1 .. C_M`.
typedef struct EverettCoefficients EverettCoefficients;

// Normalized joint cat/observer state.
typedef struct EverettState EverettState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *everett_version(void);

// Message for the last failed call on this thread. Valid until the next
// failing call on the same thread.
const char *everett_last_error(void);

// Builds coefficients from outcome measures `|C_i|^2` (must sum to 1).
//
// # Safety
// `measures` must point to `len` readable doubles; `out` must be writable.
enum EverettStatus everett_coefficients_new(const double *measures,
                                            size_t len,
                                            struct EverettCoefficients **out);

// # Safety
// `coeffs` must come from [`everett_coefficients_new`] and not be freed twice.
void everett_coefficients_free(struct EverettCoefficients *coeffs);

// Number of outcomes `M`, or 0 for a null handle.
//
// # Safety
// `coeffs` must be null or a live handle.
size_t everett_coefficients_len(const struct EverettCoefficients *coeffs);

// Measure of the count class `counts[0..len]`, linear and natural log.
// A class recording a zero-coefficient outcome yields 0 and `-inf`.
//
// # Safety
// Pointers must be valid; `counts` must hold `len` values.
enum EverettStatus everett_class_measure(const struct EverettCoefficients *coeffs,
                                         const uint64_t *counts,
                                         size_t len,
                                         double *out_linear,
                                         double *out_log);

// `ln(N! / prod n_i!)`.
//
// # Safety
// `counts` must hold `len` values; `out` must be writable.
enum EverettStatus everett_class_count_ln(const uint64_t *counts, size_t len, double *out);

// Sum of all class measures at `n`; 1 up to rounding.
//
// # Safety
// Pointers must be valid.
enum EverettStatus everett_total_class_measure(const struct EverettCoefficients *coeffs,
                                               uint64_t n,
                                               double *out);

// Maximizing fractions `|C_i|^2` into `out[0..len]`.
//
// # Safety
// `out` must hold `len` writable doubles, `len >= M`.
enum EverettStatus everett_lagrange_fractions(const struct EverettCoefficients *coeffs,
                                              double *out,
                                              size_t len);

// Modal count class at `n` into `out_counts[0..len]`; `out_tie` reports
// whether another class has equal measure.
//
// # Safety
// `out_counts` must hold `len >= M` writable values; `out_tie` writable.
enum EverettStatus everett_modal_class(const struct EverettCoefficients *coeffs,
                                       uint64_t n,
                                       uint64_t *out_counts,
                                       size_t len,
                                       bool *out_tie);

// Measure of the classes within `epsilon` (max norm) of `|C_i|^2`.
//
// # Safety
// Pointers must be valid.
enum EverettStatus everett_typicality_measure(const struct EverettCoefficients *coeffs,
                                              uint64_t n,
                                              double epsilon,
                                              double *out);

// `1 - sum_i p_i (1 - p_i) / (n epsilon^2)`.
//
// # Safety
// Pointers must be valid.
enum EverettStatus everett_chebyshev_floor(const struct EverettCoefficients *coeffs,
                                           uint64_t n,
                                           double epsilon,
                                           double *out);

// `R_n = 1 - m(apportioned class)`; the class is written to
// `out_class[0..len]` when `out_class` is non-null.
//
// # Safety
// Pointers must be valid; `out_class` null or holding `len >= M` values.
enum EverettStatus everett_residual_measure(const struct EverettCoefficients *coeffs,
                                            uint64_t n,
                                            double *out_residual,
                                            uint64_t *out_class,
                                            size_t len);

// `U (a|live> + b|dead>)|blank>`.
//
// # Safety
// `out` must be writable.
enum EverettStatus everett_cat_observe(double a_re,
                                       double a_im,
                                       double b_re,
                                       double b_im,
                                       struct EverettState **out);

// `U' |which>|blank>`. Fails with `Obstruction` when `|a| != |b|`, in which
// case `out_overlap` (if non-null) receives `|a|^2 - |b|^2`.
//
// # Safety
// `out` must be writable; `out_overlap` null or writable.
enum EverettStatus everett_cat_uprime_on_definite(double a_re,
                                                  double a_im,
                                                  double b_re,
                                                  double b_im,
                                                  enum EverettCat which,
                                                  struct EverettState **out,
                                                  double *out_overlap);

// # Safety
// `state` must come from this library and not be freed twice.
void everett_state_free(struct EverettState *state);

// Number of nonzero terms, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t everett_state_len(const struct EverettState *state);

// Measure of the observer memory state `record` in `state`.
//
// # Safety
// Pointers must be valid.
enum EverettStatus everett_state_record_measure(const struct EverettState *state,
                                                enum EverettCatRecord record,
                                                double *out);

// Cat amplitude of `|cat>|record>` in `state`.
//
// # Safety
// Pointers must be valid.
enum EverettStatus everett_state_amplitude(const struct EverettState *state,
                                           enum EverettCat which,
                                           enum EverettCatRecord record,
                                           double *out_re,
                                           double *out_im);

// Runs `trials` seeded Haar-random object-basis rotations through the
// invariance check for real `a = sqrt(a_sq)`.
//
// # Safety
// Output pointers must be writable.
enum EverettStatus everett_basis_invariance(double a_sq,
                                            uint64_t seed,
                                            uint64_t trials,
                                            double *out_max_deviation,
                                            bool *out_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVERETT_H */
