#ifndef SYNSQ_H
#define SYNSQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SynsqWavelet {
  SYNSQ_WAVELET_BUMP = 0,
  SYNSQ_WAVELET_MORLET = 1,
  SYNSQ_WAVELET_MEXICAN_HAT = 2,
} SynsqWavelet;

typedef enum SynsqStatus {
  SYNSQ_STATUS_OK = 0,
  SYNSQ_STATUS_NULL_POINTER = 1,
  SYNSQ_STATUS_INVALID_ARGUMENT = 2,
  SYNSQ_STATUS_NUMERICAL = 3,
  SYNSQ_STATUS_PARSE = 4,
  SYNSQ_STATUS_NO_RIDGE = 5,
  SYNSQ_STATUS_IO = 6,
  SYNSQ_STATUS_BUFFER_TOO_SMALL = 7,
  SYNSQ_STATUS_PANIC = 8,
} SynsqStatus;

/**
 * Opaque result of [`synsq_analyze`].
 */
typedef struct SynsqAnalysis SynsqAnalysis;

/**
 * Analysis settings. Start from [`synsq_config_default`].
 *
 * `gamma < 0` selects the automatic threshold, `pad < 0` automatic padding,
 * `band_halfwidth == 0` the voice-dependent default, and `freq_lo == freq_hi`
 * searches the whole plane for ridges.
 */
typedef struct SynsqConfig {
  size_t n_v;
  enum SynsqWavelet wavelet;
  double mu;
  double sigma;
  double gamma;
  int64_t pad;
  double smoothness;
  size_t jump_cap;
  size_t band_halfwidth;
  double freq_lo;
  double freq_hi;
} SynsqConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library defaults: bump wavelet (mu 5, sigma 1), 32 voices, automatic
 * threshold and padding.
 */
struct SynsqConfig synsq_config_default(void);

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * call into the library from the same thread.
 */
const char *synsq_last_error_message(void);

/**
 * Synchrosqueezes `len` samples spaced `dt` apart, starting at `t0`.
 *
 * # Safety
 * `values` must point to `len` readable doubles, `config` may be null (for
 * defaults) or point to a valid config, and `out` must be writable.
 */
enum SynsqStatus synsq_analyze(const double *values,
                               size_t len,
                               double t0,
                               double dt,
                               const struct SynsqConfig *config,
                               struct SynsqAnalysis **out);

/**
 * Releases a handle from [`synsq_analyze`]. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void synsq_analysis_free(struct SynsqAnalysis *h);

/**
 * Number of frequency bins (rows); 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t synsq_analysis_bins(const struct SynsqAnalysis *h);

/**
 * Number of time columns; 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t synsq_analysis_len(const struct SynsqAnalysis *h);

/**
 * Threshold the analysis used; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
double synsq_analysis_gamma(const struct SynsqAnalysis *h);

/**
 * Writes the bin centre frequencies, lowest first.
 *
 * # Safety
 * `h` must be a live handle and `out` must hold `cap` doubles.
 */
enum SynsqStatus synsq_analysis_frequencies(const struct SynsqAnalysis *h, double *out, size_t cap);

/**
 * Writes `|T|` row-major, `bins x len`, lowest frequency first.
 *
 * # Safety
 * `h` must be a live handle and `out` must hold `cap` doubles.
 */
enum SynsqStatus synsq_analysis_magnitudes(const struct SynsqAnalysis *h, double *out, size_t cap);

/**
 * Extracts `count` ridges and recovers a component around each.
 *
 * `components` receives `count x len` samples and `ridge_bins` (if not
 * null) `count x len` bin indices, both row-major with the lowest-frequency
 * component first.
 *
 * # Safety
 * `h` must be a live handle, `config` null or valid, and the buffers must
 * hold `components_cap` and `ridge_cap` elements.
 */
enum SynsqStatus synsq_analysis_decompose(const struct SynsqAnalysis *h,
                                          const struct SynsqConfig *config,
                                          size_t count,
                                          double *components,
                                          size_t components_cap,
                                          size_t *ridge_bins,
                                          size_t ridge_cap);

/**
 * Inverts every bin with centre frequency in `[lo, hi]`, clamped to the
 * plane. `clamped` (if not null) is set to 1 when clamping happened.
 *
 * # Safety
 * `h` must be a live handle, `out` must hold `cap` doubles and `clamped`
 * must be null or writable.
 */
enum SynsqStatus synsq_analysis_invert_band(const struct SynsqAnalysis *h,
                                            double lo,
                                            double hi,
                                            double *out,
                                            size_t cap,
                                            int32_t *clamped);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNSQ_H */
