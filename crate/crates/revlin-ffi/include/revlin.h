#ifndef REVLIN_H
#define REVLIN_H

/* Generated by cbindgen from the revlin-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Program families accepted by `revlin_verify_roundtrip`.
typedef enum RevlinOp {
  REVLIN_OP_MATMUL = 0,
  REVLIN_OP_INVERT = 1,
  REVLIN_OP_OLS = 2,
} RevlinOp;

// Result codes; `REVLIN_STATUS_OK` is zero, everything else is a
// failure.
typedef enum RevlinStatus {
  REVLIN_STATUS_OK = 0,
  // A required pointer was null or an argument was out of range.
  REVLIN_STATUS_INVALID_ARGUMENT = 1,
  // Text did not parse as a rational, matrix, or option value.
  REVLIN_STATUS_PARSE_ERROR = 2,
  // Matrix dimensions do not fit the operation.
  REVLIN_STATUS_SHAPE_ERROR = 3,
  // A zero pivot or singular system stopped the computation.
  REVLIN_STATUS_SINGULAR = 4,
  // A rational outgrew the configured bit-width guard.
  REVLIN_STATUS_BIT_LIMIT = 5,
  // A backward run failed to restore the store (an engine bug).
  REVLIN_STATUS_GARBAGE_LEAK = 6,
  // An unexpected internal failure.
  REVLIN_STATUS_INTERNAL = 7,
} RevlinStatus;

// Execution context: per-call cell stores inherit its guards.
typedef struct RevlinArena RevlinArena;

// An exact rational matrix value.
typedef struct RevlinMatrix RevlinMatrix;

// Resource accounting for one call, mirroring the engine's meter.
typedef struct RevlinReport {
  uint64_t primitive_ops;
  size_t peak_live_cells;
  size_t persistent_cells;
  size_t transient_peak;
  size_t garbage_cells;
  uint64_t max_bits;
} RevlinReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an execution context. Never fails; release with
// `revlin_arena_free`.
struct RevlinArena *revlin_arena_new(void);

// Releases a context. A null pointer is ignored.
void revlin_arena_free(struct RevlinArena *arena);

// Caps the bit-width of every rational touched by later calls on
// this context; zero removes the cap.
enum RevlinStatus revlin_arena_set_bit_limit(struct RevlinArena *arena, uint64_t limit);

// Parses matrix text (one row per line, whitespace-separated
// rationals) into a new matrix.
enum RevlinStatus revlin_matrix_parse(const char *text, struct RevlinMatrix **out);

// Formats a matrix in the same text form `revlin_matrix_parse`
// accepts. Release the string with `revlin_string_free`.
char *revlin_matrix_format(const struct RevlinMatrix *matrix);

// Row count; zero if the pointer is null.
size_t revlin_matrix_rows(const struct RevlinMatrix *matrix);

// Column count; zero if the pointer is null.
size_t revlin_matrix_cols(const struct RevlinMatrix *matrix);

// Releases a matrix. A null pointer is ignored.
void revlin_matrix_free(struct RevlinMatrix *matrix);

// Reversible product C = A·B. On success `out` receives a new
// matrix and, when `report` is non-null, it receives the run's
// resource accounting.
enum RevlinStatus revlin_matmul(const struct RevlinArena *arena,
                                const struct RevlinMatrix *a,
                                const struct RevlinMatrix *b,
                                struct RevlinMatrix **out,
                                struct RevlinReport *report);

// Reversible inverse via row-pull elimination (no pivoting; a zero
// leading pivot fails with `REVLIN_STATUS_SINGULAR`).
enum RevlinStatus revlin_invert(const struct RevlinArena *arena,
                                const struct RevlinMatrix *a,
                                struct RevlinMatrix **out,
                                struct RevlinReport *report);

// Least-squares or ridge fit. `x` holds one data point per column;
// with `add_bias` nonzero an all-ones row is appended. `lambda_text`
// is a nonnegative rational, or null for plain least squares. On
// success `out_theta` receives the full coefficient column (bias
// coordinate last when requested).
enum RevlinStatus revlin_ols_fit(const struct RevlinArena *arena,
                                 const struct RevlinMatrix *x,
                                 const struct RevlinMatrix *y,
                                 const char *lambda_text,
                                 int32_t add_bias,
                                 struct RevlinMatrix **out_theta,
                                 struct RevlinReport *report);

// Builds a random program of the given family and size, runs it
// forward and backward, and checks bit-exact restoration. Returns
// `REVLIN_STATUS_OK` on a clean round trip.
enum RevlinStatus revlin_verify_roundtrip(const struct RevlinArena *arena,
                                          enum RevlinOp op,
                                          size_t size,
                                          uint64_t seed);

// Static name for a status code; never null, do not free.
const char *revlin_status_name(enum RevlinStatus status);

// The message for this thread's most recent failure, or null if
// none was recorded. Release with `revlin_string_free`.
char *revlin_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
void revlin_string_free(char *text);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* REVLIN_H */
