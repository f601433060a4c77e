#ifndef ARRAYEMU_H
#define ARRAYEMU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum AeStatus {
  AE_STATUS_OK = 0,
  AE_STATUS_NULL_POINTER = 1,
  AE_STATUS_DOMAIN = 2,
  AE_STATUS_DIMENSION = 3,
  AE_STATUS_IO = 4,
  AE_STATUS_FORMAT = 5,
  AE_STATUS_MISSING_FILE = 6,
  AE_STATUS_TRAINING = 7,
  AE_STATUS_CONFIG = 8,
  AE_STATUS_PANIC = 9,
} AeStatus;

// Trained emulator handle.
typedef struct AeModel AeModel;

// MUSIC estimator handle with its cached grid steering vectors.
typedef struct AeMusic AeMusic;

// Uniform linear MIMO array description.
typedef struct AeArray {
  uintptr_t tx_count;
  uintptr_t rx_count;
  // Element spacing in wavelengths.
  double spacing_wavelengths;
} AeArray;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *ae_last_error(void);

// Virtual steering vector (length `tx_count * rx_count`, TX-major) into `out`.
//
// # Safety
// `out` must have room for `out_len` doubles.
enum AeStatus ae_virtual_steering(struct AeArray array,
                                  double theta_rad,
                                  double *out,
                                  uintptr_t out_len);

// Load a model file written by the toolkit.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
enum AeStatus ae_model_load(const char *path, struct AeModel **out);

// Stacked input and output widths of a model (`2L`, `2H`).
//
// # Safety
// All pointers must be valid.
enum AeStatus ae_model_dims(const struct AeModel *model,
                            uintptr_t *input_dim,
                            uintptr_t *output_dim);

// Emulate high-array snapshots from low-array ones.
//
// `low_data` holds `L x pulses` complex values; `out` receives
// `H x pulses` complex values.
//
// # Safety
// Pointers must be valid for the stated sizes.
enum AeStatus ae_model_predict(const struct AeModel *model,
                               struct AeArray low,
                               struct AeArray high,
                               const double *low_data,
                               uintptr_t pulses,
                               double *out,
                               uintptr_t out_len);

// Release a model handle. Null is ignored.
//
// # Safety
// `model` must come from [`ae_model_load`] and not be used afterwards.
void ae_model_free(struct AeModel *model);

// Build a MUSIC estimator for `targets` sources on the grid
// `lo_deg..=hi_deg` with step `step_deg`.
//
// # Safety
// `out` must be a valid pointer.
enum AeStatus ae_music_new(struct AeArray array,
                           double lo_deg,
                           double hi_deg,
                           double step_deg,
                           uintptr_t targets,
                           struct AeMusic **out);

// Estimate angles (degrees, ascending) from `virtual_size x pulses`
// complex snapshots. `angles_out` receives `targets` values;
// `degenerate` (optional) is set to 1 when fewer peaks than targets were found.
//
// # Safety
// Pointers must be valid for the stated sizes; `degenerate` may be null.
enum AeStatus ae_music_estimate(const struct AeMusic *music,
                                const double *data,
                                uintptr_t pulses,
                                double *angles_out,
                                uintptr_t angles_len,
                                int32_t *degenerate);

// Release a MUSIC handle. Null is ignored.
//
// # Safety
// `music` must come from [`ae_music_new`] and not be used afterwards.
void ae_music_free(struct AeMusic *music);

// Deterministic CRB on the angles. `signals` is `k x snapshots` complex;
// `diag_out` (length `k`) receives the per-target bounds in rad².
//
// # Safety
// Pointers must be valid for the stated sizes.
enum AeStatus ae_crb(struct AeArray array,
                     const double *angles_rad,
                     uintptr_t k,
                     const double *signals,
                     uintptr_t snapshots,
                     double noise_var,
                     double *diag_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARRAYEMU_H */
