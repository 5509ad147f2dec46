#ifndef DISPERSION_H
#define DISPERSION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function.
typedef enum DispersionStatus {
  DISPERSION_STATUS_OK = 0,
  DISPERSION_STATUS_NULL_POINTER = 1,
  // Malformed function or instance data.
  DISPERSION_STATUS_INVALID_INPUT = 2,
  DISPERSION_STATUS_OUT_OF_DOMAIN = 3,
  // Parameters such as lambda, epsilon or the geometry are out of range.
  DISPERSION_STATUS_BAD_PARAMETER = 4,
  // Curve values outside `[0, H]`.
  DISPERSION_STATUS_RANGE_VIOLATION = 5,
  DISPERSION_STATUS_NUMERIC_OVERFLOW = 6,
  DISPERSION_STATUS_TOO_LARGE = 7,
  DISPERSION_STATUS_INTERNAL = 99,
} DispersionStatus;

// Opaque piecewise constant/affine function of one parameter.
typedef struct DispersionFn DispersionFn;

// Opaque exponentially weighted forecaster.
typedef struct DispersionForecaster DispersionForecaster;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *dispersion_last_error_message(void);

// Builds a function on `[lo, hi]` with `n_breakpoints` interior
// breakpoints and `n_breakpoints + 1` pieces `slope * rho + intercept`.
// A zero slope gives a constant piece.
//
// # Safety
// `breakpoints` must hold `n_breakpoints` values, `slopes` and
// `intercepts` `n_breakpoints + 1` each; `out_fn` must be writable.
enum DispersionStatus dispersion_fn_new(double lo,
                                        double hi,
                                        const double *breakpoints,
                                        uintptr_t n_breakpoints,
                                        const double *slopes,
                                        const double *intercepts,
                                        struct DispersionFn **out_fn);

// Releases a function handle. Null is ignored.
//
// # Safety
// `f` must come from this library and not be used afterwards.
void dispersion_fn_free(struct DispersionFn *f);

// Number of pieces.
//
// # Safety
// `f` must be a live handle; `out_count` writable.
enum DispersionStatus dispersion_fn_piece_count(const struct DispersionFn *f, uintptr_t *out_count);

// # Safety
// `f` must be a live handle; `out_value` writable.
enum DispersionStatus dispersion_fn_eval(const struct DispersionFn *f,
                                         double rho,
                                         double *out_value);

// Sum of `count` functions over a common domain. `count == 0` is an error
// here since the domain would be unknown.
//
// # Safety
// `fns` must hold `count` live handles; `out_fn` writable.
enum DispersionStatus dispersion_fn_sum(const struct DispersionFn *const *fns,
                                        uintptr_t count,
                                        struct DispersionFn **out_fn);

// A maximizer and the maximum value. Constant pieces report their
// midpoint; increasing affine pieces the largest point they contain.
//
// # Safety
// `f` must be a live handle; both outputs writable.
enum DispersionStatus dispersion_fn_argmax(const struct DispersionFn *f,
                                           double *out_rho,
                                           double *out_value);

// `integral_a^b exp(lambda f)`.
//
// # Safety
// `f` must be a live handle; `out_value` writable.
enum DispersionStatus dispersion_fn_exp_integral(const struct DispersionFn *f,
                                                 double lambda,
                                                 double a,
                                                 double b,
                                                 double *out_value);

// One exact draw from the density proportional to `exp(lambda f)`, using a
// generator seeded with `seed`.
//
// # Safety
// `f` must be a live handle; `out_rho` writable.
enum DispersionStatus dispersion_fn_sample(const struct DispersionFn *f,
                                           double lambda,
                                           uint64_t seed,
                                           double *out_rho);

// JSON text of the function; release it with [`dispersion_string_free`].
//
// # Safety
// `f` must be a live handle; `out_json` writable.
enum DispersionStatus dispersion_fn_to_json(const struct DispersionFn *f, char **out_json);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void dispersion_string_free(char *s);

// Utility curve of the parameterized knapsack greedy on `[0, b]`.
//
// # Safety
// `values` and `sizes` must hold `n` entries; `out_fn` writable.
enum DispersionStatus dispersion_knapsack_curve(const double *values,
                                                const double *sizes,
                                                uintptr_t n,
                                                double capacity,
                                                double b,
                                                struct DispersionFn **out_fn);

// Utility curve of the parameterized MWIS greedy on `[0, b]`. `edges`
// holds `n_edges` vertex pairs flattened; `residual_degrees` selects the
// degree rule.
//
// # Safety
// `weights` must hold `n` entries and `edges` `2 * n_edges`; `out_fn` writable.
enum DispersionStatus dispersion_mwis_curve(const double *weights,
                                            uintptr_t n,
                                            const uintptr_t *edges,
                                            uintptr_t n_edges,
                                            double b,
                                            bool residual_degrees,
                                            struct DispersionFn **out_fn);

// `sqrt(d ln(R/w) / T) / H`.
//
// # Safety
// `out_lambda` writable.
enum DispersionStatus dispersion_lambda_full_info(uintptr_t d,
                                                  double r,
                                                  double w,
                                                  uintptr_t t,
                                                  double h,
                                                  double *out_lambda);

// `eps / (4 H sqrt(2 T ln(1/delta)))`.
//
// # Safety
// `out_lambda` writable.
enum DispersionStatus dispersion_lambda_private(double eps,
                                                double delta,
                                                uintptr_t t,
                                                double h,
                                                double *out_lambda);

// Forecaster on `[lo, hi]` with temperature `lambda` and range bound `h`.
//
// # Safety
// `out_forecaster` writable.
enum DispersionStatus dispersion_forecaster_new(double lo,
                                                double hi,
                                                double lambda,
                                                double h,
                                                uint64_t seed,
                                                struct DispersionForecaster **out_forecaster);

// Releases a forecaster. Null is ignored.
//
// # Safety
// `f` must come from this library and not be used afterwards.
void dispersion_forecaster_free(struct DispersionForecaster *f);

// Samples the next parameter.
//
// # Safety
// `f` must be a live handle; `out_rho` writable.
enum DispersionStatus dispersion_forecaster_play(struct DispersionForecaster *f, double *out_rho);

// Adds the round's utility curve, which must lie in `[0, H]` on the
// forecaster's domain.
//
// # Safety
// Both handles must be live.
enum DispersionStatus dispersion_forecaster_update(struct DispersionForecaster *f,
                                                   const struct DispersionFn *curve);

// One draw of the exponential mechanism with `lambda = eps / (2H)` on the
// sum of `count` curves, each in `[0, h]`.
//
// # Safety
// `fns` must hold `count` live handles; `out_rho` writable.
enum DispersionStatus dispersion_exp_mech_1d(const struct DispersionFn *const *fns,
                                             uintptr_t count,
                                             double eps,
                                             double h,
                                             uint64_t seed,
                                             double *out_rho);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISPERSION_H */
