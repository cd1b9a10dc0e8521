#ifndef FOCKFILTER_H
#define FOCKFILTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FfStatus {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_POINTER = 1,
  FF_STATUS_INVALID_ARGUMENT = 2,
  FF_STATUS_PARSE = 3,
  FF_STATUS_EXECUTION = 4,
  FF_STATUS_PANIC = 5,
} FfStatus;

/**
 * Opaque circuit handle.
 */
typedef struct FfCircuit FfCircuit;

/**
 * Opaque handle to a conditioned ensemble.
 */
typedef struct FfEnsemble FfEnsemble;

/**
 * Detector error budget; see `error_analysis` in the Rust crate.
 */
typedef struct FfErrorReport {
  double eta;
  double dark;
  double misread_2_as_1;
  double hv_error_rate;
  double ideal_success_prob;
  double false_transmission_prob;
  double lossy_acceptance;
  double mixture_entangled_fraction;
  double mixture_single_photon_fraction;
  double dark_counts_per_pulse;
} FfErrorReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ff_last_error_message(void);

/**
 * Builds the two-photon polarization filter. With `lossy` false the detector
 * parameters are ignored and ideal detectors are used.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FfStatus ff_filter_circuit_new(double attenuator_r,
                                    bool lossy,
                                    double eta,
                                    double dark,
                                    struct FfCircuit **out);

/**
 * Parses a JSON circuit description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FfStatus ff_circuit_parse_json(const char *json, struct FfCircuit **out);

/**
 * Serializes a circuit to JSON. Release the string with [`ff_string_free`].
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum FfStatus ff_circuit_to_json(const struct FfCircuit *circuit, char **out);

/**
 * Number of modes in the circuit's registry, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be null or a live handle.
 */
size_t ff_circuit_mode_count(const struct FfCircuit *circuit);

/**
 * Writes the 4×4 conditional operator on (HH, HV, VH, VV), row-major with
 * rows indexing outputs, into `re[16]` and `im[16]`.
 *
 * # Safety
 * `circuit` must be a live handle; `re` and `im` must each hold 16 doubles.
 */
enum FfStatus ff_circuit_effective_operator(const struct FfCircuit *circuit,
                                            double *re,
                                            double *im);

/**
 * Runs the circuit on the basis state with `counts[i]` photons in mode `i`.
 * `len` must equal the mode count.
 *
 * # Safety
 * `circuit` must be a live handle, `counts` must hold `len` bytes and `out`
 * must be writable.
 */
enum FfStatus ff_circuit_run_basis(const struct FfCircuit *circuit,
                                   const uint8_t *counts,
                                   size_t len,
                                   struct FfEnsemble **out);

/**
 * Total post-selection probability of an ensemble, or NaN for a null handle.
 *
 * # Safety
 * `ensemble` must be null or a live handle.
 */
double ff_ensemble_acceptance(const struct FfEnsemble *ensemble);

/**
 * Number of branches in an ensemble, or 0 for a null handle.
 *
 * # Safety
 * `ensemble` must be null or a live handle.
 */
size_t ff_ensemble_branch_count(const struct FfEnsemble *ensemble);

/**
 * Unnormalized amplitude of the basis term `counts` in a pure ensemble
 * (weight folded in). Fails with `Execution` on a mixed ensemble.
 *
 * # Safety
 * `ensemble` must be a live handle, `counts` must hold `len` bytes and
 * `re`, `im` must be writable.
 */
enum FfStatus ff_ensemble_amplitude(const struct FfEnsemble *ensemble,
                                    const uint8_t *counts,
                                    size_t len,
                                    double *re,
                                    double *im);

/**
 * Detector error budget of the filter.
 *
 * # Safety
 * `out` must be writable.
 */
enum FfStatus ff_error_analysis(double eta,
                                double dark,
                                double dark_rate_cps,
                                double window_s,
                                struct FfErrorReport *out);

/**
 * # Safety
 * `circuit` must be null or a handle not yet freed.
 */
void ff_circuit_free(struct FfCircuit *circuit);

/**
 * # Safety
 * `ensemble` must be null or a handle not yet freed.
 */
void ff_ensemble_free(struct FfEnsemble *ensemble);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void ff_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOCKFILTER_H */
