#ifndef KLEINIAN2_H
#define KLEINIAN2_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum Kleinian2Status {
  KLEINIAN2_STATUS_OK = 0,
  KLEINIAN2_STATUS_NULL_POINTER = 1,
  KLEINIAN2_STATUS_INVALID_INPUT = 2,
  KLEINIAN2_STATUS_DEGREE = 3,
  KLEINIAN2_STATUS_REPEATED_ROOT = 4,
  KLEINIAN2_STATUS_NOT_ON_CURVE = 5,
  KLEINIAN2_STATUS_SPECIAL_DIVISOR = 6,
  KLEINIAN2_STATUS_INFINITE_POINT = 7,
  KLEINIAN2_STATUS_DIAGONAL = 8,
  KLEINIAN2_STATUS_DEGENERATE_GEOMETRY = 9,
  KLEINIAN2_STATUS_QUADRATURE = 10,
  KLEINIAN2_STATUS_SHEET_TRACKING = 11,
  KLEINIAN2_STATUS_RIEMANN_MATRIX = 12,
  KLEINIAN2_STATUS_DELTA_AMBIGUITY = 13,
  KLEINIAN2_STATUS_ILL_CONDITIONED_LATTICE = 14,
  KLEINIAN2_STATUS_TRUNCATION_RADIUS = 15,
  KLEINIAN2_STATUS_NORMALIZATION = 16,
  KLEINIAN2_STATUS_ON_THETA_DIVISOR = 17,
  KLEINIAN2_STATUS_ROOT_SELECTION_AMBIGUITY = 18,
  KLEINIAN2_STATUS_NOT_WEIERSTRASS_FORM = 19,
  KLEINIAN2_STATUS_ON_SIGMA_DIVISOR = 20,
  KLEINIAN2_STATUS_SIGN_RESOLUTION = 21,
  KLEINIAN2_STATUS_CONVERGENCE = 22,
  KLEINIAN2_STATUS_IO = 23,
  KLEINIAN2_STATUS_PANIC = 99,
} Kleinian2Status;

/*
 Opaque handle to certified period data plus normalization constants.
 */
typedef struct Kleinian2Context Kleinian2Context;

/*
 Opaque handle to a validated polynomial.
 */
typedef struct Kleinian2Curve Kleinian2Curve;

/*
 A complex number as two doubles.
 */
typedef struct Kleinian2Complex {
  double re;
  double im;
} Kleinian2Complex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failure on this thread, or NULL. The pointer
 stays valid until the next call into the library on the same thread.
 */
const char *kleinian2_last_error_message(void);

/*
 Static name of a status code, e.g. "RepeatedRoot".
 */
const char *kleinian2_status_name(enum Kleinian2Status status);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must be NULL or a pointer obtained from this library and not yet freed.
 */
void kleinian2_string_free(char *s);

/*
 Validates f(x) = Σ coeffs[k] xᵏ and returns a curve handle.

 # Safety
 `coeffs` must point to 7 readable values; `out` must be writable.
 */
enum Kleinian2Status kleinian2_curve_new(const struct Kleinian2Complex *coeffs,
                                         struct Kleinian2Curve **out);

/*
 Parses `{"coeffs": [[re, im] × 7]}` and returns a curve handle.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum Kleinian2Status kleinian2_curve_from_json(const char *json, struct Kleinian2Curve **out);

/*
 Releases a curve handle. NULL is ignored.

 # Safety
 `curve` must be NULL or a handle from this library that was not freed.
 */
void kleinian2_curve_free(struct Kleinian2Curve *curve);

/*
 Degree of the polynomial (5 or 6), or 0 for NULL.

 # Safety
 `curve` must be NULL or a live handle.
 */
uint32_t kleinian2_curve_degree(const struct Kleinian2Curve *curve);

/*
 Copies the finite branch points into `out` (capacity `cap`) and stores
 their count in `len`.

 # Safety
 `out` must have room for `cap` values; `len` must be writable.
 */
enum Kleinian2Status kleinian2_curve_branch_points(const struct Kleinian2Curve *curve,
                                                   struct Kleinian2Complex *out,
                                                   uintptr_t cap,
                                                   uintptr_t *len);

/*
 Computes and certifies period data for `curve`, with default tolerances
 adjusted by `KLEINIAN2_TOL`.

 # Safety
 `curve` must be a live handle; `out` must be writable.
 */
enum Kleinian2Status kleinian2_context_new(const struct Kleinian2Curve *curve,
                                           struct Kleinian2Context **out);

/*
 Builds a context from period data previously produced by
 [`kleinian2_context_periods_json`], re-certifying it against `curve`.

 # Safety
 `curve` must be a live handle, `json` NUL-terminated, `out` writable.
 */
enum Kleinian2Status kleinian2_context_from_periods_json(const struct Kleinian2Curve *curve,
                                                         const char *json,
                                                         struct Kleinian2Context **out);

/*
 Releases a context handle. NULL is ignored.

 # Safety
 `ctx` must be NULL or a handle from this library that was not freed.
 */
void kleinian2_context_free(struct Kleinian2Context *ctx);

/*
 Period data as JSON; free the result with [`kleinian2_string_free`].

 # Safety
 `ctx` must be a live handle; `out` must be writable.
 */
enum Kleinian2Status kleinian2_context_periods_json(const struct Kleinian2Context *ctx, char **out);

/*
 The Riemann matrix Ω in row-major order.

 # Safety
 `ctx` must be a live handle; `out` must have room for 4 values.
 */
enum Kleinian2Status kleinian2_context_omega(const struct Kleinian2Context *ctx,
                                             struct Kleinian2Complex *out);

/*
 Writes S, S11, S12, S22 at `z` into `out[0..4]`.

 # Safety
 `z` must point to 2 values, `out` must have room for 4.
 */
enum Kleinian2Status kleinian2_eval_weight2(const struct Kleinian2Context *ctx,
                                            const struct Kleinian2Complex *z,
                                            struct Kleinian2Complex *out);

/*
 Writes ℘11, ℘12, ℘22 at `z` into `out[0..3]`.

 # Safety
 `z` must point to 2 values, `out` must have room for 3.
 */
enum Kleinian2Status kleinian2_eval_wp(const struct Kleinian2Context *ctx,
                                       const struct Kleinian2Complex *z,
                                       struct Kleinian2Complex *out);

/*
 Writes σ(z) into `out`; Weierstrass-form curves only.

 # Safety
 `z` must point to 2 values, `out` must be writable.
 */
enum Kleinian2Status kleinian2_eval_sigma(const struct Kleinian2Context *ctx,
                                          const struct Kleinian2Complex *z,
                                          struct Kleinian2Complex *out);

/*
 Every available value at `z` as JSON.

 # Safety
 `z` must point to 2 values, `out` must be writable.
 */
enum Kleinian2Status kleinian2_eval_bundle_json(const struct Kleinian2Context *ctx,
                                                const struct Kleinian2Complex *z,
                                                bool with_sigma,
                                                char **out);

/*
 Abel image of a divisor given as `{"p": point, "q": point}` JSON.

 # Safety
 `divisor_json` must be NUL-terminated; `out` must have room for 2 values.
 */
enum Kleinian2Status kleinian2_abel(const struct Kleinian2Context *ctx,
                                    const char *divisor_json,
                                    struct Kleinian2Complex *out);

/*
 Divisor D with Abel image `z`, as JSON.

 # Safety
 `z` must point to 2 values, `out` must be writable.
 */
enum Kleinian2Status kleinian2_invert_json(const struct Kleinian2Context *ctx,
                                           const struct Kleinian2Complex *z,
                                           char **out);

/*
 Runs the identity suite. `checks` is a comma-separated subset or NULL for
 all checks. The report JSON goes to `out` and its overall verdict to
 `passed`.

 # Safety
 `checks` must be NULL or NUL-terminated; `out` and `passed` writable.
 */
enum Kleinian2Status kleinian2_verify_json(const struct Kleinian2Context *ctx,
                                           uint64_t seed,
                                           const char *checks,
                                           char **out,
                                           bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KLEINIAN2_H */
