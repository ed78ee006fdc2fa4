#ifndef GENREFORGE_H
#define GENREFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call. The first four match the CLI exit
 * codes.
 */
typedef enum {
  GF_STATUS_OK = 0,
  GF_STATUS_IO = 1,
  GF_STATUS_CONFIG = 2,
  GF_STATUS_INTERNAL = 3,
  GF_STATUS_NULL_POINTER = 4,
  GF_STATUS_BUFFER_TOO_SMALL = 5,
  GF_STATUS_INVALID_UTF8 = 6,
  GF_STATUS_PANIC = 7,
} GfStatus;

/**
 * Trained autoencoder.
 */
typedef struct GfAutoencoder GfAutoencoder;

/**
 * Min-max scaling fitted on training vectors.
 */
typedef struct GfScaler GfScaler;

/**
 * Trained one-vs-one SVM.
 */
typedef struct GfSvm GfSvm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gf_version(void);

/**
 * Copies the calling thread's most recent error message. An empty string
 * means no error has been recorded.
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes; `required` may be null.
 */
GfStatus gf_last_error_message(char *buf, size_t buf_len, size_t *required);

/**
 * Length of the content feature vector (224).
 */
size_t gf_feature_count(void);

/**
 * Name of content component `index`, e.g. `mfcc.M.0`.
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes; `required` may be null.
 */
GfStatus gf_feature_name(size_t index, char *buf, size_t buf_len, size_t *required);

/**
 * Extracts the 224 content features from mono samples in `[-1, 1]`.
 * Clips at other rates are resampled to 22050 Hz first.
 *
 * # Safety
 * `samples` must point to `n_samples` doubles and `out` to `out_len`
 * writable doubles; `out_len` must equal [`gf_feature_count`].
 */
GfStatus gf_extract_features(const double *samples,
                             size_t n_samples,
                             uint32_t sample_rate,
                             double *out,
                             size_t out_len);

/**
 * Extracts the 224 content features from a PCM WAV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must point to `out_len`
 * writable doubles.
 */
GfStatus gf_extract_features_wav(const char *path_ptr, double *out, size_t out_len);

/**
 * Loads scaling parameters written by the CLI (`scaling*.json`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
GfStatus gf_scaler_load(const char *path_ptr, GfScaler **out);

/**
 * Number of components the scaler expects.
 *
 * # Safety
 * `scaler` must be null or a live handle.
 */
size_t gf_scaler_dim(const GfScaler *scaler);

/**
 * Scales `x` into `out` (both of length [`gf_scaler_dim`]).
 *
 * # Safety
 * `scaler` must be a live handle; `x` and `out` must point to `len` doubles.
 */
GfStatus gf_scaler_apply(const GfScaler *scaler, const double *x, double *out, size_t len);

/**
 * # Safety
 * `scaler` must be null or a handle not yet freed.
 */
void gf_scaler_free(GfScaler *scaler);

/**
 * Loads an autoencoder written by the CLI (`autoencoder.json`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
GfStatus gf_autoencoder_load(const char *path_ptr, GfAutoencoder **out);

/**
 * # Safety
 * `ae` must be null or a live handle.
 */
size_t gf_autoencoder_input_dim(const GfAutoencoder *ae);

/**
 * # Safety
 * `ae` must be null or a live handle.
 */
size_t gf_autoencoder_code_dim(const GfAutoencoder *ae);

/**
 * Bottleneck code of a scaled input vector.
 *
 * # Safety
 * `ae` must be a live handle; `x` must point to `x_len` doubles and `out`
 * to `out_len` writable doubles.
 */
GfStatus gf_autoencoder_encode(const GfAutoencoder *ae,
                               const double *x,
                               size_t x_len,
                               double *out,
                               size_t out_len);

/**
 * # Safety
 * `ae` must be null or a handle not yet freed.
 */
void gf_autoencoder_free(GfAutoencoder *ae);

/**
 * Loads an SVM written by the CLI (`svm*.json`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
GfStatus gf_svm_load(const char *path_ptr, GfSvm **out);

/**
 * Input dimension the SVM was trained on.
 *
 * # Safety
 * `svm` must be null or a live handle.
 */
size_t gf_svm_dim(const GfSvm *svm);

/**
 * # Safety
 * `svm` must be null or a live handle.
 */
size_t gf_svm_class_count(const GfSvm *svm);

/**
 * Predicted class index of a scaled vector.
 *
 * # Safety
 * `svm` must be a live handle, `x` must point to `x_len` doubles and
 * `class_out` must be writable.
 */
GfStatus gf_svm_predict(const GfSvm *svm, const double *x, size_t x_len, size_t *class_out);

/**
 * Name of class `index`.
 *
 * # Safety
 * `svm` must be a live handle; `buf` must point to `buf_len` writable
 * bytes; `required` may be null.
 */
GfStatus gf_svm_class_name(const GfSvm *svm,
                           size_t index,
                           char *buf,
                           size_t buf_len,
                           size_t *required);

/**
 * # Safety
 * `svm` must be null or a handle not yet freed.
 */
void gf_svm_free(GfSvm *svm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENREFORGE_H */
