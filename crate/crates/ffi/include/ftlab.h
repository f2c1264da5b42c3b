#ifndef FTLAB_H
#define FTLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FtlabGranularity {
  FTLAB_GRANULARITY_LOGICAL = 0,
  FTLAB_GRANULARITY_PHYSICAL = 1,
} FtlabGranularity;

/*
 Location kinds, which also name the gadgets.
 */
typedef enum FtlabKind {
  FTLAB_KIND_MEMORY = 0,
  FTLAB_KIND_SWAP = 1,
  FTLAB_KIND_T_GATE = 2,
  FTLAB_KIND_READOUT = 3,
} FtlabKind;

typedef enum FtlabLevel {
  FTLAB_LEVEL_LEVEL1 = 0,
  FTLAB_LEVEL_LEVEL_N = 1,
} FtlabLevel;

typedef enum FtlabStatus {
  FTLAB_STATUS_OK = 0,
  FTLAB_STATUS_NULL_POINTER = 1,
  FTLAB_STATUS_INVALID_ARGUMENT = 2,
  FTLAB_STATUS_NO_ROOT = 3,
  FTLAB_STATUS_CENSUS_INVALID = 4,
  FTLAB_STATUS_IO = 5,
  FTLAB_STATUS_VERIFY_FAILED = 6,
  FTLAB_STATUS_PANIC = 7,
} FtlabStatus;

/*
 Opaque census table.
 */
typedef struct FtlabCensus FtlabCensus;

typedef struct FtlabRatios {
  double rm;
  double rr;
  double tr;
} FtlabRatios;

typedef struct FtlabThreshold {
  uint32_t level;
  double threshold;
  double bracket_lo;
  double bracket_hi;
  uint32_t iterations;
  double residual;
  double reference_failure;
  bool converged;
  uint32_t sign_changes;
} FtlabThreshold;

/*
 Gadget failure probabilities, indexed like [`FtlabKind`].
 */
typedef struct FtlabFailures {
  uint32_t level;
  double probs[4];
} FtlabFailures;

typedef struct FtlabVerifySummary {
  uint64_t faults;
  uint64_t failure_count;
  uint32_t max_weight;
  uint64_t conflicts;
  uint64_t unknown_patterns;
  bool pass;
} FtlabVerifySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on this thread.
 */
const char *ftlab_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ftlab_version(void);

/*
 New handle holding the built-in census. Free with [`ftlab_census_free`].
 */
struct FtlabCensus *ftlab_census_builtin(void);

/*
 Loads and validates a census file.

 # Safety
 `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum FtlabStatus ftlab_census_load(const char *path, struct FtlabCensus **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `c` must come from this library and not be used afterwards.
 */
void ftlab_census_free(struct FtlabCensus *c);

/*
 Count of `kind` locations in the `gadget` row at `tr`.

 # Safety
 `c` is null or a live handle; `out` is writable.
 */
enum FtlabStatus ftlab_census_count(const struct FtlabCensus *c,
                                    enum FtlabLevel level,
                                    enum FtlabKind gadget,
                                    enum FtlabKind kind,
                                    double tr,
                                    double *out);

/*
 Level-`level` threshold.

 # Safety
 `c` is null or a live handle; `out` is writable.
 */
enum FtlabStatus ftlab_level_threshold(const struct FtlabCensus *c,
                                       struct FtlabRatios ratios,
                                       uint32_t level,
                                       struct FtlabThreshold *out);

/*
 Asymptotic threshold.

 # Safety
 `c` is null or a live handle; `out` is writable.
 */
enum FtlabStatus ftlab_asymptotic_threshold(const struct FtlabCensus *c,
                                            struct FtlabRatios ratios,
                                            struct FtlabThreshold *out);

/*
 Gadget failure probabilities at `level` for gate failure rate `p0s`.

 # Safety
 `c` is null or a live handle; `out` is writable.
 */
enum FtlabStatus ftlab_gadget_failures(const struct FtlabCensus *c,
                                       struct FtlabRatios ratios,
                                       double p0s,
                                       uint32_t level,
                                       struct FtlabFailures *out);

/*
 Single-fault verification of a component named like the CLI's
 `--component`. Returns `VerifyFailed` when some fault fails; the summary
 is filled in either way.

 # Safety
 `component` is a NUL-terminated string; `out` is writable.
 */
enum FtlabStatus ftlab_verify(const char *component,
                              enum FtlabGranularity granularity,
                              struct FtlabVerifySummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FTLAB_H */
