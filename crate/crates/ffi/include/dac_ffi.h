#ifndef DAC_FFI_H
#define DAC_FFI_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum DacStatus {
  DAC_STATUS_OK = 0,
  // A required pointer argument was null.
  DAC_STATUS_NULL_POINTER = 1,
  // Invalid parameters, malformed text or JSON, empty expert sets.
  DAC_STATUS_INVALID_ARGUMENT = 2,
  // Argument outside the mathematical domain, e.g. a quantile level not in (0, 1).
  DAC_STATUS_DOMAIN = 3,
  // The benchmark KL divergence is zero or infinite.
  DAC_STATUS_UNDEFINED_RATIO = 4,
  DAC_STATUS_NUMERICAL = 5,
  // A Rust panic was caught at the boundary.
  DAC_STATUS_PANIC = 6,
} DacStatus;

// A distribution: normal, uniform or two-piece skew-normal.
typedef struct DacDistribution DacDistribution;

// A scored and ranked set of expert priors.
typedef struct DacReport DacReport;

// Result of [`dac_kl`].
typedef struct DacKlResult {
  // `+inf` when `q` has zero density where `p` has mass.
  double value;
  double estimated_error;
  double truncated_mass;
  bool infinite;
  bool floored;
  // The quadrature exhausted its budget or hit numerical slack.
  bool has_warning;
} DacKlResult;

// One expert's score, see [`dac_report_entry`].
typedef struct DacReportEntry {
  double kl_value;
  double dac_value;
  bool conflict;
  // 1 is the best agreement with the data.
  size_t rank;
} DacReportEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next library call on the same thread.
const char *dac_last_error_message(void);

// Library version as a static nul-terminated string.
const char *dac_version(void);

// Normal distribution with standard deviation `sd`.
enum DacStatus dac_distribution_normal(double mean, double sd, struct DacDistribution **out);

enum DacStatus dac_distribution_uniform(double lower, double upper, struct DacDistribution **out);

// Two-piece skew-normal; `location` and `scale` belong to the base normal
// before skewing.
enum DacStatus dac_distribution_skew_normal(double location,
                                            double scale,
                                            double shape,
                                            struct DacDistribution **out);

// Two-piece skew-normal with the given mean and standard deviation.
enum DacStatus dac_distribution_skew_normal_mean_sd(double mean,
                                                    double sd,
                                                    double shape,
                                                    struct DacDistribution **out);

// Parse an inline spec such as `"uniform:0,5"` or `"skew_normal:2.15,0.09,0.78"`.
//
// # Safety
// `text` must be null or a valid nul-terminated string.
enum DacStatus dac_distribution_parse(const char *text, struct DacDistribution **out);

// # Safety
// `dist` must be null or a handle from this library not yet freed.
void dac_distribution_free(struct DacDistribution *dist);

// # Safety
// `dist` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_distribution_density(const struct DacDistribution *dist, double x, double *out);

// # Safety
// `dist` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_distribution_log_density(const struct DacDistribution *dist,
                                            double x,
                                            double *out);

// # Safety
// `dist` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_distribution_cdf(const struct DacDistribution *dist, double x, double *out);

// Inverse cdf; `p` must lie strictly between 0 and 1.
//
// # Safety
// `dist` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_distribution_quantile(const struct DacDistribution *dist, double p, double *out);

// # Safety
// `dist` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_distribution_mean(const struct DacDistribution *dist, double *out);

// # Safety
// `dist` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_distribution_sd(const struct DacDistribution *dist, double *out);

// `KL(p || q)`. A `relative_tolerance` of 0 selects the default.
//
// # Safety
// `p` and `q` must be live handles; `out` must point to writable memory.
enum DacStatus dac_kl(const struct DacDistribution *p,
                      const struct DacDistribution *q,
                      double relative_tolerance,
                      struct DacKlResult *out);

// Score `count` expert priors against a normal `posterior` and a `benchmark`
// prior. `ids` may be null, in which case experts are named `"1"`, `"2"`, ...
//
// # Safety
// `experts` must point to `count` live handles; `ids`, when not null, to
// `count` nul-terminated strings; `out` must point to writable memory.
enum DacStatus dac_evaluate(const struct DacDistribution *posterior,
                            const struct DacDistribution *benchmark,
                            const struct DacDistribution *const *experts,
                            const char *const *ids,
                            size_t count,
                            double relative_tolerance,
                            struct DacReport **out);

// Run the full rank pipeline from a JSON request (the body accepted by the
// HTTP `/api/rank` endpoint). The report handle serializes to the full
// report document, including input digests.
//
// # Safety
// `request_json` must be a nul-terminated string; `out` must point to writable memory.
enum DacStatus dac_rank_json(const char *request_json, struct DacReport **out);

// Number of experts in the report.
//
// # Safety
// `report` must be null or a live handle.
size_t dac_report_len(const struct DacReport *report);

// # Safety
// `report` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_report_benchmark_kl(const struct DacReport *report, double *out);

// Score of the expert at `index` in the caller's input order.
//
// # Safety
// `report` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_report_entry(const struct DacReport *report,
                                size_t index,
                                struct DacReportEntry *out);

// Pretty JSON of the report; release with [`dac_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must point to writable memory.
enum DacStatus dac_report_to_json(const struct DacReport *report, char **out);

// # Safety
// `report` must be null or a handle from this library not yet freed.
void dac_report_free(struct DacReport *report);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void dac_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DAC_FFI_H */
