#ifndef HOMLEAP_H
#define HOMLEAP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum HomleapStatus {
  HOMLEAP_STATUS_OK = 0,
  HOMLEAP_STATUS_NULL_POINTER = 1,
  HOMLEAP_STATUS_PARITY_MISMATCH = 2,
  HOMLEAP_STATUS_OUT_OF_RANGE = 3,
  HOMLEAP_STATUS_OFF_LATTICE = 4,
  HOMLEAP_STATUS_DEGENERATE = 5,
  HOMLEAP_STATUS_NO_SOLUTION = 6,
  HOMLEAP_STATUS_NOT_NORMALIZED = 7,
  HOMLEAP_STATUS_NEGATIVE = 8,
  HOMLEAP_STATUS_PARITY_VIOLATION = 9,
  HOMLEAP_STATUS_INVALID = 10,
  HOMLEAP_STATUS_PANIC = 11,
} HomleapStatus;

// Probability distribution over the output difference `Δ_out`.
typedef struct HomleapDistribution HomleapDistribution;

// Imperfections applied on top of an ideal run. Zero-initialise and set
// the fields you need, or start from `homleap_options_default`.
typedef struct HomleapOptions {
  // Polarization mismatch in radians, within `[0, π/2]`.
  double distinguishability;
  // Rotate the polarization of the second input instead of the first.
  bool rotate_second;
  // Source quality `η` in `(0, 1]`; values `<= 0` mean a pure source.
  double source_eta;
  // Detector efficiency in `(0, 1]`; values `<= 0` mean ideal detectors.
  double detector_efficiency;
  // Detector resolution in counts; `0` and `1` mean single-count resolution.
  uint32_t resolution;
} HomleapOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Options describing an ideal run.
struct HomleapOptions homleap_options_default(void);

// Distribution of `Δ_out` for `total` photons with input difference `delta`
// at reflectivity `r`. `options` may be null for an ideal run.
//
// # Safety
// `options` must be null or point to a valid `HomleapOptions`; `out` must be
// a valid pointer. On success `*out` owns a handle to free with
// `homleap_distribution_free`.
enum HomleapStatus homleap_distribution_new(uint32_t total,
                                            int64_t delta,
                                            double r,
                                            const struct HomleapOptions *options,
                                            struct HomleapDistribution **out);

// Release a handle. Null is ignored.
//
// # Safety
// `dist` must be null or a handle not yet freed.
void homleap_distribution_free(struct HomleapDistribution *dist);

// Number of `(Δ_out, probability)` rows; zero for a null handle.
//
// # Safety
// `dist` must be null or a live handle.
size_t homleap_distribution_len(const struct HomleapDistribution *dist);

// Row `index` in ascending `Δ_out` order.
//
// # Safety
// `dist` must be a live handle; `delta_out` and `probability` must be valid.
enum HomleapStatus homleap_distribution_row(const struct HomleapDistribution *dist,
                                            size_t index,
                                            int64_t *delta_out,
                                            double *probability);

// Probability of one `Δ_out`; zero when the value has no row.
//
// # Safety
// `dist` must be a live handle; `probability` must be valid.
enum HomleapStatus homleap_distribution_probability(const struct HomleapDistribution *dist,
                                                    int64_t delta_out,
                                                    double *probability);

// Mean and variance of `Δ_out`. Either output pointer may be null.
//
// # Safety
// `dist` must be a live handle; non-null outputs must be valid.
enum HomleapStatus homleap_distribution_moments(const struct HomleapDistribution *dist,
                                                double *mean,
                                                double *variance);

// Closed-form variance of `Δ_out` for an ideal run.
//
// # Safety
// `variance` must be valid.
enum HomleapStatus homleap_predicted_variance(uint32_t total,
                                              int64_t delta,
                                              double r,
                                              double *variance);

// Two-photon-interference visibility for `n` and `m` photons at
// reflectivity `r`, with whether it exceeds the classical bound of one half.
//
// # Safety
// `value` must be valid; `nonclassical` may be null.
enum HomleapStatus homleap_visibility(uint32_t n,
                                      uint32_t m,
                                      double r,
                                      double *value,
                                      bool *nonclassical);

// Description of the last failure on this thread, empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *homleap_last_error(void);

// Static name of a status code.
const char *homleap_status_name(enum HomleapStatus status);

// Library version as a static string.
const char *homleap_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOMLEAP_H */
