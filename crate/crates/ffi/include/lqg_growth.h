#ifndef LQG_GROWTH_H
#define LQG_GROWTH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LqgStatus {
  LQG_STATUS_OK = 0,
  LQG_STATUS_NULL_POINTER = 1,
  LQG_STATUS_INVALID_UTF8 = 2,
  LQG_STATUS_UNKNOWN_SUITE = 3,
  LQG_STATUS_CONFIG = 4,
  LQG_STATUS_NUMERICAL = 5,
  LQG_STATUS_IO = 6,
  LQG_STATUS_OUT_OF_RANGE = 7,
  LQG_STATUS_PANIC = 8,
} LqgStatus;

// Configuration of one suite run.
typedef struct LqgConfig LqgConfig;

// Result of a suite run.
typedef struct LqgReport LqgReport;

// Numeric part of one check. `stderr` is NaN for deterministic checks.
typedef struct LqgCheck {
  double lhs;
  double rhs;
  double stderr;
  bool pass;
} LqgCheck;

// Pure-gravity constants.
typedef struct LqgPureGravity {
  double gamma;
  double d_gamma;
  double xi;
  double q;
  double two_pi_c;
} LqgPureGravity;

// Monte Carlo estimate.
typedef struct LqgEstimate {
  double mean;
  double stderr;
} LqgEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// call into the library from the same thread.
const char *lqg_last_error(void);

// Default configuration of `suite`, written to `*out`.
//
// # Safety
// `suite` must be a nul-terminated string and `out` a valid pointer.
enum LqgStatus lqg_config_new(const char *suite, uint64_t seed, struct LqgConfig **out);

// Apply one `key = value` override; the configuration is left unchanged on error.
//
// # Safety
// `cfg` must come from [`lqg_config_new`]; `key` and `value` must be nul-terminated.
enum LqgStatus lqg_config_set(struct LqgConfig *cfg, const char *key, const char *value);

// # Safety
// `cfg` must come from [`lqg_config_new`] or be null.
void lqg_config_free(struct LqgConfig *cfg);

// Run the configured suite.
//
// # Safety
// `cfg` must come from [`lqg_config_new`] and `out` be a valid pointer.
enum LqgStatus lqg_run(const struct LqgConfig *cfg, struct LqgReport **out);

// # Safety
// `rep` must come from [`lqg_run`] or be null.
void lqg_report_free(struct LqgReport *rep);

// Whether every check passed; false for a null handle.
//
// # Safety
// `rep` must come from [`lqg_run`] or be null.
bool lqg_report_passed(const struct LqgReport *rep);

// Number of checks; 0 for a null handle.
//
// # Safety
// `rep` must come from [`lqg_run`] or be null.
uintptr_t lqg_report_check_count(const struct LqgReport *rep);

// Numbers of check `index`.
//
// # Safety
// `rep` must come from [`lqg_run`] and `out` be a valid pointer.
enum LqgStatus lqg_report_check(const struct LqgReport *rep, uintptr_t index, struct LqgCheck *out);

// Id of check `index`, owned by the report; null when out of range.
//
// # Safety
// `rep` must come from [`lqg_run`] or be null.
const char *lqg_report_check_id(const struct LqgReport *rep, uintptr_t index);

// Report as JSON; release with [`lqg_string_free`].
//
// # Safety
// `rep` must come from [`lqg_run`] and `out` be a valid pointer.
enum LqgStatus lqg_report_json(const struct LqgReport *rep, char **out);

// Write `report.json` and the CSV series into `dir`.
//
// # Safety
// `rep` must come from [`lqg_run`]; `dir` must be nul-terminated.
enum LqgStatus lqg_report_write(const struct LqgReport *rep, const char *dir);

// # Safety
// `s` must come from this library or be null.
void lqg_string_free(char *s);

// Pure-gravity constants.
//
// # Safety
// `out` must be a valid pointer.
enum LqgStatus lqg_pure_gravity(struct LqgPureGravity *out);

// First and second moments of the total chaos mass at degree `n` on `m` points.
//
// # Safety
// `first` and `second` must be valid pointers.
enum LqgStatus lqg_gmc_mass_moments(double xi,
                                    uintptr_t n,
                                    uintptr_t m,
                                    uintptr_t n_samples,
                                    uint64_t seed,
                                    struct LqgEstimate *first,
                                    struct LqgEstimate *second);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LQG_GROWTH_H */
