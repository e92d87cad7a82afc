#ifndef TENSOR_PHASE_H
#define TENSOR_PHASE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every entry point.
typedef enum tp_status {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_ARGUMENT = 1,
  TP_STATUS_SHAPE = 2,
  TP_STATUS_RANGE = 3,
  TP_STATUS_SINGULAR = 4,
  TP_STATUS_NOT_SECTORIAL = 5,
  TP_STATUS_DOMAIN = 6,
  TP_STATUS_PRECONDITION = 7,
  TP_STATUS_NUMERIC = 8,
  TP_STATUS_FORMAT = 9,
  TP_STATUS_POLE = 10,
  TP_STATUS_ILL_POSED = 11,
  TP_STATUS_SIZE = 12,
  // Output buffer too small; the needed length was still written.
  TP_STATUS_BUFFER_TOO_SMALL = 13,
  TP_STATUS_PANIC = 14,
} tp_status;

typedef enum tp_class {
  TP_CLASS_SECTORIAL = 0,
  TP_CLASS_QUASI_SECTORIAL = 1,
  TP_CLASS_SEMI_SECTORIAL = 2,
  TP_CLASS_INDEFINITE = 3,
} tp_class;

typedef enum tp_verdict {
  TP_VERDICT_PASS = 0,
  TP_VERDICT_FAIL = 1,
  TP_VERDICT_INAPPLICABLE = 2,
} tp_verdict;

typedef enum tp_loop {
  TP_LOOP_STABLE = 0,
  TP_LOOP_UNSTABLE = 1,
  TP_LOOP_ILL_POSED = 2,
} tp_loop;

// Opaque MLTI state-space system.
typedef struct tp_system tp_system;

// Opaque even-order (or general) tensor.
typedef struct tp_tensor tp_tensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *tp_last_error(void);

// Builds a tensor from split real and imaginary parts in storage order.
//
// # Safety
// Array arguments must point to at least the stated number of elements.
enum tp_status tp_tensor_new(const size_t *row_dims,
                             size_t n_row,
                             const size_t *col_dims,
                             size_t n_col,
                             const double *re,
                             const double *im,
                             size_t len,
                             struct tp_tensor **result);

// # Safety
// `dims` must point to `n` elements.
enum tp_status tp_tensor_identity(const size_t *dims, size_t n, struct tp_tensor **result);

// Parses the JSON tensor format.
//
// # Safety
// `json` must be a NUL-terminated string.
enum tp_status tp_tensor_from_json(const char *json, struct tp_tensor **result);

// Serializes to the JSON tensor format; release with [`tp_string_free`].
//
// # Safety
// `t` must be a live handle.
enum tp_status tp_tensor_to_json(const struct tp_tensor *t, char **result);

// # Safety
// `s` must come from this library, or be null.
void tp_string_free(char *s);

// # Safety
// `t` must come from this library, or be null.
void tp_tensor_free(struct tp_tensor *t);

// Row and column counts of the unfolding.
//
// # Safety
// `t` must be a live handle.
enum tp_status tp_tensor_size(const struct tp_tensor *t, size_t *rows, size_t *cols);

// Copies the entries in storage order into `re`/`im` of capacity `cap`.
//
// # Safety
// `re` and `im` must have room for `cap` elements.
enum tp_status tp_tensor_data(const struct tp_tensor *t,
                              double *re,
                              double *im,
                              size_t cap,
                              size_t *len);

// `A *_N B`.
//
// # Safety
// `a` and `b` must be live handles.
enum tp_status tp_einstein_product(const struct tp_tensor *a,
                                   const struct tp_tensor *b,
                                   struct tp_tensor **result);

// Sectoriality class and field angle.
//
// # Safety
// `t` must be a live handle.
enum tp_status tp_classify(const struct tp_tensor *t, enum tp_class *class_, double *field_angle);

// Phases sorted descending into `phases` (capacity `cap`) and their
// center. `len` receives the phase count even when the buffer is short.
//
// # Safety
// `phases` must have room for `cap` elements.
enum tp_status tp_phases(const struct tp_tensor *t,
                         double *phases,
                         size_t cap,
                         size_t *len,
                         double *gamma);

// Parses `{"A","B","C","D"}` system JSON.
//
// # Safety
// `json` must be a NUL-terminated string.
enum tp_status tp_system_from_json(const char *json, struct tp_system **result);

// # Safety
// `s` must come from this library, or be null.
void tp_system_free(struct tp_system *s);

// Peak gain over `points` log-spaced frequencies in `[1e−3, 1e3]`, plus 0
// and ∞.
//
// # Safety
// `s` must be a live handle.
enum tp_status tp_hinf_norm(const struct tp_system *s, size_t points, double *value, double *omega);

// Small phase verdict and closed-loop oracle for the loop of `g` and `h`.
//
// # Safety
// `g` and `h` must be live handles.
enum tp_status tp_small_phase_check(const struct tp_system *g,
                                    const struct tp_system *h,
                                    size_t points,
                                    enum tp_verdict *verdict,
                                    enum tp_loop *oracle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TENSOR_PHASE_H */
