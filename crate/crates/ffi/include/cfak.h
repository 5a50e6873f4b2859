#ifndef CFAK_H
#define CFAK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfakStatus {
  CFAK_OK = 0,
  /*
   A required pointer argument was null.
   */
  CFAK_ERR_NULL = 1,
  CFAK_ERR_INVALID_ARGUMENT = 2,
  CFAK_ERR_UNKNOWN_BENCHMARK = 3,
  /*
   The DoE budget ran out before the stopping rule was met.
   */
  CFAK_ERR_BUDGET_EXHAUSTED = 4,
  CFAK_ERR_RUNTIME = 5,
  CFAK_ERR_PANIC = 6,
} CfakStatus;

/*
 A benchmark limit-state function with its input distribution.
 */
typedef struct CfakBenchmark CfakBenchmark;

/*
 A fitted surrogate and its construction record.
 */
typedef struct CfakSurrogate CfakSurrogate;

/*
 Outcome of one seed.
 */
typedef struct CfakRunSummary {
  double pf;
  double cov;
  uint64_t n_mc;
  uint64_t n_fail;
  /*
   True-function evaluations.
   */
  uint64_t n_g;
  /*
   Surrogate predictions during construction.
   */
  uint64_t n_pred;
  uint64_t doe_size;
  double wall_ms;
} CfakRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *cfak_version(void);

/*
 Message for the last failed call on this thread; empty after a success.
 Valid until the next cfak call on the same thread.
 */
const char *cfak_last_error(void);

/*
 Creates a benchmark by id. `params_json` may be null or an object such as
 `{"k": 3.9}`.

 # Safety
 `id` and `params_json` must be null or NUL-terminated strings; `out` must
 be null or writable.
 */
enum CfakStatus cfak_benchmark_create(const char *id,
                                      const char *params_json,
                                      struct CfakBenchmark **out);

/*
 # Safety
 `bench` must come from [`cfak_benchmark_create`] and not be used afterwards.
 */
void cfak_benchmark_free(struct CfakBenchmark *bench);

/*
 # Safety
 `bench` must be a live handle and `out` writable.
 */
enum CfakStatus cfak_benchmark_dim(const struct CfakBenchmark *bench, size_t *out);

/*
 Evaluates the limit-state function at a standard-normal point of length `len`.

 # Safety
 `u` must point to `len` doubles and `out` must be writable.
 */
enum CfakStatus cfak_benchmark_eval_u(const struct CfakBenchmark *bench,
                                      const double *u,
                                      size_t len,
                                      double *out);

/*
 Runs one seed of `method` (`"cfak_c"`, `"akmcs_u"`, `"mcs"`, ...).
 `overrides_json` may be null or an object of method settings.

 # Safety
 String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum CfakStatus cfak_run(const struct CfakBenchmark *bench,
                         const char *method,
                         const char *overrides_json,
                         uint64_t seed,
                         struct CfakRunSummary *out);

/*
 Builds a surrogate with one of the cfak variants, without any Monte Carlo stage.

 # Safety
 String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum CfakStatus cfak_surrogate_build(const struct CfakBenchmark *bench,
                                     const char *method,
                                     const char *overrides_json,
                                     uint64_t seed,
                                     struct CfakSurrogate **out);

/*
 # Safety
 `s` must come from [`cfak_surrogate_build`] and not be used afterwards.
 */
void cfak_surrogate_free(struct CfakSurrogate *s);

/*
 Predictive mean and variance at `u`.

 # Safety
 `u` must point to `len` doubles; `mean` and `variance` must be writable.
 */
enum CfakStatus cfak_surrogate_predict(const struct CfakSurrogate *s,
                                       const double *u,
                                       size_t len,
                                       double *mean,
                                       double *variance);

/*
 Number of training points, initial design included.

 # Safety
 `s` must be a live handle and `out` writable.
 */
enum CfakStatus cfak_surrogate_doe_size(const struct CfakSurrogate *s, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CFAK_H */
