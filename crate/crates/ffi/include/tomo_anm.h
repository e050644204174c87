#ifndef TOMO_ANM_H
#define TOMO_ANM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum TomoStatus {
  TOMO_STATUS_OK = 0,
  TOMO_STATUS_NULL_POINTER = 1,
  TOMO_STATUS_INVALID_ARGUMENT = 2,
  TOMO_STATUS_NUMERICAL = 3,
  TOMO_STATUS_NOT_CONVERGED = 4,
  TOMO_STATUS_DIVERGED = 5,
  TOMO_STATUS_IO = 6,
  TOMO_STATUS_FORMAT = 7,
  TOMO_STATUS_PANIC = 8,
} TomoStatus;

// Reconstructed point cloud.
typedef struct TomoCloud TomoCloud;

// Estimator with its configuration.
typedef struct TomoEstimator TomoEstimator;

// Estimated line spectrum.
typedef struct TomoSpectrum TomoSpectrum;

// SLC stack loaded from a file.
typedef struct TomoStack TomoStack;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call on the same thread.
const char *tomo_last_error(void);

// Creates an estimator with default settings for an `n`-element array.
//
// `algorithm` is one of "ivdst-anm", "sdp-anm", "omp" or "ist";
// `noise_sigma` is the per-element noise standard deviation (0 if unknown
// or noiseless) and `k` the expected number of lines.
//
// # Safety
// `algorithm` must be a NUL-terminated string and `out` a valid pointer.
enum TomoStatus tomo_estimator_new(const char *algorithm,
                                   size_t n,
                                   double noise_sigma,
                                   size_t k,
                                   struct TomoEstimator **out);

// Releases an estimator; null is ignored.
//
// # Safety
// `estimator` must come from [`tomo_estimator_new`] and not be used again.
void tomo_estimator_free(struct TomoEstimator *estimator);

// Estimates `k` lines from `n` interleaved complex samples.
//
// # Safety
// `samples` must point to `2 n` doubles; `estimator` and `out` must be valid.
enum TomoStatus tomo_estimate(const struct TomoEstimator *estimator,
                              const double *samples,
                              size_t n,
                              size_t k,
                              struct TomoSpectrum **out);

// Number of lines; 0 for null.
//
// # Safety
// `spectrum` must be null or valid.
size_t tomo_spectrum_len(const struct TomoSpectrum *spectrum);

// Frequency and complex amplitude of line `index`.
//
// # Safety
// All pointers must be valid.
enum TomoStatus tomo_spectrum_line(const struct TomoSpectrum *spectrum,
                                   size_t index,
                                   double *frequency,
                                   double *re,
                                   double *im);

// Releases a spectrum; null is ignored.
//
// # Safety
// `spectrum` must come from this library and not be used again.
void tomo_spectrum_free(struct TomoSpectrum *spectrum);

// Reads an SLC stack file acquired with the default array (0.11 m
// spacing, 9.6 GHz, 1 km range, 45 degree view).
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum TomoStatus tomo_stack_read(const char *path, struct TomoStack **out);

// Channels, azimuth lines and range bins of a stack.
//
// # Safety
// All pointers must be valid.
enum TomoStatus tomo_stack_dims(const struct TomoStack *stack,
                                size_t *channels,
                                size_t *azimuth,
                                size_t *range);

// Releases a stack; null is ignored.
//
// # Safety
// `stack` must come from this library and not be used again.
void tomo_stack_free(struct TomoStack *stack);

// Reconstructs a point cloud with `algorithm` tuned per pixel, keeping
// at most `k_max` lines per pixel above `noise_multiple` times the pixel's
// estimated noise level.
//
// # Safety
// `algorithm` must be a NUL-terminated string; `stack` and `out` valid.
enum TomoStatus tomo_reconstruct(const struct TomoStack *stack,
                                 const char *algorithm,
                                 size_t k_max,
                                 double noise_multiple,
                                 struct TomoCloud **out);

// Number of points; 0 for null.
//
// # Safety
// `cloud` must be null or valid.
size_t tomo_cloud_len(const struct TomoCloud *cloud);

// Pixel, height (m) and intensity of point `index`.
//
// # Safety
// All pointers must be valid.
enum TomoStatus tomo_cloud_point(const struct TomoCloud *cloud,
                                 size_t index,
                                 size_t *azimuth,
                                 size_t *range,
                                 double *height,
                                 double *intensity);

// Releases a cloud; null is ignored.
//
// # Safety
// `cloud` must come from this library and not be used again.
void tomo_cloud_free(struct TomoCloud *cloud);

// Single-tone frequency CRLB (cycles squared) for `n` elements.
//
// # Safety
// `out` must be a valid pointer.
enum TomoStatus tomo_crlb_single_tone(size_t n, double snr_db, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOMO_ANM_H */
