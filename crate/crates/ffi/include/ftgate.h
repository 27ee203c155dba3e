/* Copyright 2026 The ftgate Authors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef FTGATE_H
#define FTGATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum FtgateStatus {
  FTGATE_STATUS_OK = 0,
  FTGATE_STATUS_NULL_POINTER = 1,
  FTGATE_STATUS_INVALID_ARGUMENT = 2,
  FTGATE_STATUS_DIMENSION_MISMATCH = 3,
  FTGATE_STATUS_NOT_HERMITIAN = 4,
  FTGATE_STATUS_NOT_UNITARY = 5,
  FTGATE_STATUS_NUMERIC = 6,
  FTGATE_STATUS_IO = 7,
  FTGATE_STATUS_PANIC = 8,
  FTGATE_STATUS_OTHER = 9,
} FtgateStatus;

/**
 * Drift plus control Hamiltonians.
 */
typedef struct FtgateModel FtgateModel;

/**
 * Piecewise-constant control amplitudes.
 */
typedef struct FtgatePulse FtgatePulse;

/**
 * Logical target unitary for a code and gate.
 */
typedef struct FtgateTarget FtgateTarget;

/**
 * Optimizer settings; start from [`ftgate_options_default`].
 */
typedef struct FtgateOptions {
  /**
   * 0 = sequential, 1 = GRAPE.
   */
  uint32_t algorithm;
  double epsilon0;
  double target_fidelity;
  /**
   * 0 selects the algorithm's default budget.
   */
  size_t max_iterations;
  /**
   * Non-positive means unbounded.
   */
  double amplitude_bound;
  uint64_t seed;
} FtgateOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ftgate_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ftgate_version(void);

/**
 * Builds the logical target for `code` ("five_qubit", "bitflip3") and
 * `gate` ("I", "X", "Y", "Z", "S", "T", "Had").
 *
 * # Safety
 * `code` and `gate` must be NUL-terminated strings; `out` must be writable.
 */
enum FtgateStatus ftgate_target_new(const char *code, const char *gate, struct FtgateTarget **out);

/**
 * Hilbert-space dimension of a target, 0 for a null handle.
 *
 * # Safety
 * `target` must be null or a live handle.
 */
size_t ftgate_target_dim(const struct FtgateTarget *target);

/**
 * Copies the row-major entries into `re` and `im`, each of length `len`,
 * which must equal `dim * dim`.
 *
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum FtgateStatus ftgate_target_entries(const struct FtgateTarget *target,
                                        double *re,
                                        double *im,
                                        size_t len);

/**
 * # Safety
 * `target` must be null or a handle not yet freed.
 */
void ftgate_target_free(struct FtgateTarget *target);

/**
 * Global-control model: `-1/2 sum omega_n Z_n + J sum Z_n Z_{n+1}` with
 * collective X and Y controls.
 *
 * # Safety
 * `omegas` must point to `count` doubles; `out` must be writable.
 */
enum FtgateStatus ftgate_model_global_new(const double *omegas,
                                          size_t count,
                                          double j,
                                          struct FtgateModel **out);

/**
 * Local-control model: `Omega sum X_n + J sum Z_n Z_{n+1}` with one Z
 * control per qubit.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtgateStatus ftgate_model_local_new(double omega,
                                         double j,
                                         size_t num_qubits,
                                         struct FtgateModel **out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ftgate_model_num_controls(const struct FtgateModel *model);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ftgate_model_dim(const struct FtgateModel *model);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ftgate_model_free(struct FtgateModel *model);

/**
 * Zero pulse with `steps` equal steps spanning `t_final`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtgateStatus ftgate_pulse_new(size_t num_controls,
                                   size_t steps,
                                   double t_final,
                                   struct FtgatePulse **out);

/**
 * # Safety
 * `pulse` must be null or a live handle.
 */
size_t ftgate_pulse_num_steps(const struct FtgatePulse *pulse);

/**
 * # Safety
 * `pulse` must be a live handle.
 */
enum FtgateStatus ftgate_pulse_set_amplitude(struct FtgatePulse *pulse,
                                             size_t control,
                                             size_t step,
                                             double value);

/**
 * # Safety
 * `pulse` must be a live handle and `out` writable.
 */
enum FtgateStatus ftgate_pulse_get_amplitude(const struct FtgatePulse *pulse,
                                             size_t control,
                                             size_t step,
                                             double *out);

/**
 * Pulse as CSV; release the string with [`ftgate_string_free`].
 *
 * # Safety
 * `pulse` must be a live handle and `out` writable.
 */
enum FtgateStatus ftgate_pulse_to_csv(const struct FtgatePulse *pulse, char **out);

/**
 * # Safety
 * `pulse` must be null or a handle not yet freed.
 */
void ftgate_pulse_free(struct FtgatePulse *pulse);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void ftgate_string_free(char *s);

/**
 * Fidelity of the pulse's propagator against the target: `Re Tr[W^dag U]/N`
 * when `phase_invariant` is false, `|Tr[W^dag U]|/N` otherwise.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum FtgateStatus ftgate_fidelity(const struct FtgateModel *model,
                                  const struct FtgateTarget *target,
                                  const struct FtgatePulse *pulse,
                                  bool phase_invariant,
                                  double *out);

struct FtgateOptions ftgate_options_default(void);

/**
 * Optimizes `pulse` in place toward `target`. `out_fidelity` and
 * `out_converged` may be null.
 *
 * # Safety
 * Handles must be live; non-null out pointers must be writable.
 */
enum FtgateStatus ftgate_optimize(const struct FtgateModel *model,
                                  const struct FtgateTarget *target,
                                  struct FtgatePulse *pulse,
                                  struct FtgateOptions options,
                                  double *out_fidelity,
                                  bool *out_converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FTGATE_H */
