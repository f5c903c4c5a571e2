/* Copyright 2026 The ksorbit Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of libksorbit. Every function returns a ks_status; on failure
 * ks_last_error() holds a message for the calling thread. Handles are opaque
 * and owned by the caller (free with the matching *_free).
 *
 * Metadata arguments are "key=value" lines separated by '\n' (may be NULL);
 * they are embedded in the written files.
 */
#ifndef KSORBIT_KSORBIT_H
#define KSORBIT_KSORBIT_H

#include <stddef.h>

#if defined(KSORBIT_BUILDING_LIBRARY)
#define KS_API __attribute__((visibility("default")))
#else
#define KS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ks_status {
  KS_OK = 0,
  KS_ERR_INVALID_ARGUMENT = 1,
  KS_ERR_DIMENSION_MISMATCH = 2,
  KS_ERR_SINGULAR_BLOCK = 3,
  KS_ERR_DIVISION_BY_ZERO_INTERVAL = 4,
  KS_ERR_STEP_SIZE_UNDERFLOW = 5,
  KS_ERR_NO_PERIODICITY = 6,
  KS_ERR_INSUFFICIENT_SAMPLES = 7,
  KS_ERR_SINGULAR_SYSTEM = 8,
  KS_ERR_MAX_ITER = 9,
  KS_ERR_DEGENERATE_SEED = 10,
  KS_ERR_STEP_UNDERFLOW = 11,
  KS_ERR_VALIDATION_FAILED = 12,
  KS_ERR_NO_IMPROVEMENT = 13,
  KS_ERR_PARSE = 14,
  KS_ERR_IO = 15,
  KS_ERR_EIGENSOLVER = 16,
  KS_ERR_INTERNAL = 99
} ks_status;

typedef struct ks_orbit ks_orbit;
typedef struct ks_cascade ks_cascade;
typedef struct ks_newton_report ks_newton_report;
typedef struct ks_family ks_family;
typedef struct ks_certificate ks_certificate;
typedef struct ks_stability ks_stability;

KS_API const char* ks_version(void);
KS_API const char* ks_status_name(ks_status s);
KS_API const char* ks_last_error(void);

/* ---- exploration ------------------------------------------------------ */

typedef struct ks_explore_options {
  int order;
  double transient;
  double window;
  double budget;
  double tol;
  double recurrence_tol;
  double cluster_gap;
  double noise_floor;
  int samples;
} ks_explore_options;

KS_API void ks_explore_options_default(ks_explore_options* opt);

KS_API ks_status ks_cascade_scan(double inv_nu_min, double inv_nu_max, int steps,
                                 const ks_explore_options* opt, int threads, ks_cascade** out);
KS_API size_t ks_cascade_size(const ks_cascade* c);
/* Cluster count of point i (0 when failed); failed set to 1 on integrator failure. */
KS_API ks_status ks_cascade_point(const ks_cascade* c, size_t i, double* inv_nu, size_t* clusters,
                                  int* failed);
KS_API ks_status ks_cascade_write_csv(const ks_cascade* c, const char* path, const char* metadata);
KS_API void ks_cascade_free(ks_cascade* c);

/* Attracting orbit from the flow, as a candidate of degrees (d1, d2). */
KS_API ks_status ks_orbit_from_flow(double inv_nu, int d1, int d2, const ks_explore_options* opt,
                                    ks_orbit** out);

/* ---- orbits ----------------------------------------------------------- */

KS_API ks_status ks_orbit_read(const char* path, ks_orbit** out);
/* Binary "KSORB1" when path ends in .ksorb, JSON text otherwise. */
KS_API ks_status ks_orbit_write(const ks_orbit* o, const char* path, const char* metadata);
KS_API ks_status ks_orbit_info(const ks_orbit* o, double* nu, double* f, int* d1, int* d2);
/* Zero-padded or truncated copy. */
KS_API ks_status ks_orbit_resize(const ks_orbit* o, int d1, int d2, ks_orbit** out);
/* Adds delta to coefficient (k1, k2) (sine selects b). */
KS_API ks_status ks_orbit_perturb(ks_orbit* o, int k1, int k2, int sine, double delta);
/* ||S_c^{-1} e||_M with c = 1/nu and weights (r, s1, s2). */
KS_API ks_status ks_orbit_residual(const ks_orbit* o, double r, double s1, double s2, double* out);
KS_API ks_status ks_orbit_write_heatmap(const ks_orbit* o, int n_theta, int n_x, const char* path,
                                        const char* metadata);
KS_API void ks_orbit_free(ks_orbit* o);

/* ---- Newton and continuation ------------------------------------------ */

typedef struct ks_newton_options {
  double tol;
  int max_iter;
  double c; /* <= 0: 1/nu */
  double r, s1, s2;
  double degenerate_tol;
  int fix_phase;
  int log;
  int grow; /* grow degrees while mode tails exceed 1e-8 */
} ks_newton_options;

KS_API void ks_newton_options_default(ks_newton_options* opt);
/* On success *out holds the converged orbit and *report (optional) the report. */
KS_API ks_status ks_newton_solve(const ks_orbit* seed, const ks_newton_options* opt, ks_orbit** out,
                                 ks_newton_report** report);
KS_API ks_status ks_newton_report_summary(const ks_newton_report* r, int* iterations,
                                          double* final_residual, double* quadratic_constant);
KS_API ks_status ks_newton_report_write(const ks_newton_report* r, const char* path, const char* metadata);
KS_API void ks_newton_report_free(ks_newton_report* r);

/* Natural-parameter continuation in 1/nu from a converged start. */
KS_API ks_status ks_continue(const ks_orbit* start, double inv_nu_target, double dinv_nu_max,
                             const ks_newton_options* opt, ks_family** out);
KS_API size_t ks_family_size(const ks_family* f);
KS_API ks_status ks_family_get(const ks_family* f, size_t i, ks_orbit** out);
KS_API int ks_family_step_underflow(const ks_family* f);
KS_API const char* ks_family_message(const ks_family* f);
KS_API void ks_family_free(ks_family* f);

/* ---- validation -------------------------------------------------------- */

typedef struct ks_validation_options {
  double r, s1, s2;
  int dt1, dt2; /* <= 0: automatic */
  double c;     /* <= 0: 1/nu rounded up */
  int k3_conservative;
  size_t max_dimension;
  int threads;
  int log;
} ks_validation_options;

KS_API void ks_validation_options_default(ks_validation_options* opt);
/* KS_ERR_VALIDATION_FAILED still returns the partial certificate in *out. */
KS_API ks_status ks_validate(const ks_orbit* o, const ks_validation_options* opt, ks_certificate** out);
KS_API ks_status ks_certificate_improve(ks_certificate* c, int d1, int d2, double* r_hat, double* E_r_hat);
/* success: 1 validated, 0 failed; stage is "" on success. */
KS_API ks_status ks_certificate_summary(const ks_certificate* c, int* success, double* alpha, double* E,
                                        const char** stage);
KS_API ks_status ks_certificate_write(const ks_certificate* c, const char* path, const char* metadata,
                                      int with_timings);
KS_API void ks_certificate_free(ks_certificate* c);

/* ---- stability --------------------------------------------------------- */

/* Runs both methods. strip_offset NaN selects -f/2. u = 0 is rejected (DEGENERATE_SEED). */
KS_API ks_status ks_stability_run(const ks_orbit* o, int n_x, int d1, int d2, double strip_offset,
                                  double margin, ks_stability** out);
KS_API ks_status ks_stability_summary(const ks_stability* s, int* monodromy_unstable,
                                      int* operator_unstable, int* agree);
KS_API const char* ks_stability_warning(const ks_stability* s);
KS_API ks_status ks_stability_write(const ks_stability* s, const char* report_path,
                                    const char* monodromy_csv, const char* operator_csv,
                                    const char* metadata);
KS_API void ks_stability_free(ks_stability* s);

#ifdef __cplusplus
}
#endif

#endif /* KSORBIT_KSORBIT_H */
