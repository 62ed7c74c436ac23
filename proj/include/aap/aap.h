/*
 *   Copyright 2026 The aap-solver Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


/*
 * C interface to the fixed-point solver library.
 *
 * All objects are opaque handles created by aap_*_create-style functions and
 * released with the matching aap_*_free. Every fallible call returns an
 * aap_status; on failure aap_last_error() describes the problem for the
 * calling thread. Matrices are passed column-major.
 */

#ifndef AAP_AAP_H
#define AAP_AAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AAP_API __declspec(dllexport)
#else
#define AAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aap_status {
  AAP_OK = 0,
  AAP_ERR_INVALID_ARGUMENT = 1,
  AAP_ERR_DIMENSION = 2,
  AAP_ERR_IO = 3,
  AAP_ERR_PARSE = 4,
  AAP_ERR_NUMERICAL = 5,
  AAP_ERR_INTERNAL = 99
} aap_status;

typedef enum aap_solver_kind {
  AAP_SOLVER_PICARD = 0,
  AAP_SOLVER_AA = 1,
  AAP_SOLVER_RESAA = 2,
  AAP_SOLVER_AAP = 3,
  AAP_SOLVER_NEWTON_GMRES = 4
} aap_solver_kind;

typedef enum aap_solve_status {
  AAP_SOLVE_CONVERGED = 0,
  AAP_SOLVE_MAX_ITERS = 1,
  AAP_SOLVE_BREAKDOWN = 2
} aap_solve_status;

typedef struct aap_problem aap_problem;
typedef struct aap_dataset aap_dataset;
typedef struct aap_report aap_report;
typedef struct aap_trace aap_trace;

typedef struct aap_solver_options {
  size_t m;                /* Picard steps per sweep / window size */
  double beta;             /* damping, >= 0 */
  double tol;              /* stopping threshold on ||f|| */
  int relative_tol;        /* nonzero: threshold is tol * ||f(x0)|| */
  size_t max_global_iters;
  size_t max_g_evals;      /* 0 = unlimited */
  double rank_tol;
  double jvp_fd_step;
  int diagnostics;         /* nonzero: record diagnostics on AAP runs */
} aap_solver_options;

/* One trace row. Missing values are NaN. */
typedef struct aap_record {
  size_t t;
  int picard_substep;
  size_t g_evals;
  double residual_norm;
  double theta;
  double metric;
  double jac_gmres_gain;
  double et_norm;
  double et_bound;
  double cond_s;
  double cond_y;
  double cond_g;
  double s_minus_g_norm;
  double y_minus_jg_norm;
  double sigma_min_y_over_f;
  double forcing_term;
  double spd_gain_upper;
  double vandermonde_upper;
  double b_inv_norm;
} aap_record;

typedef struct aap_libsvm_options {
  int use_binary_positive; /* nonzero: label == binary_positive maps to +1, others to -1 */
  double binary_positive;
  size_t n_features;       /* 0 = largest index seen */
} aap_libsvm_options;

/* g(x) into gx; return 0 on success. */
typedef int (*aap_map_fn)(void* user, const double* x, double* gx, size_t d);

AAP_API const char* aap_version(void);
AAP_API const char* aap_last_error(void);
AAP_API const char* aap_status_string(aap_status status);

AAP_API void aap_solver_options_default(aap_solver_options* opts);
AAP_API aap_status aap_solver_from_name(const char* name, aap_solver_kind* kind);
AAP_API const char* aap_solver_name(aap_solver_kind kind);
AAP_API const char* aap_solve_status_name(aap_solve_status status);

/* problems */
AAP_API aap_status aap_problem_affine(const double* a, const double* b, size_t d, aap_problem** out);
AAP_API aap_status aap_problem_affine_random(size_t d, double norm, uint64_t seed, aap_problem** out);
AAP_API aap_status aap_problem_quadratic(const double* c, size_t d, double scale, aap_problem** out);
/* Fixed point drawn uniformly from [0, 0.4]^d. */
AAP_API aap_status aap_problem_quadratic_random(size_t d, double scale, uint64_t seed, aap_problem** out);
AAP_API aap_status aap_problem_logistic(const aap_dataset* data, double mu, double eta, aap_problem** out);
AAP_API aap_status aap_problem_nmf(const double* a, size_t d1, size_t d2, size_t r, aap_problem** out);
AAP_API aap_status aap_problem_nmf_synthetic(size_t d1, size_t d2, size_t r, uint64_t matrix_seed,
                                             aap_problem** out);
AAP_API aap_status aap_problem_callback(size_t d, aap_map_fn g, void* user, aap_problem** out);
AAP_API size_t aap_problem_dimension(const aap_problem* problem);
/* Zero for most problems, uniform random factors for NMF. */
AAP_API aap_status aap_problem_default_x0(const aap_problem* problem, uint64_t seed, double* x0, size_t d);
AAP_API aap_status aap_problem_eval_g(const aap_problem* problem, const double* x, double* gx, size_t d);
AAP_API void aap_problem_free(aap_problem* problem);

/* datasets */
AAP_API aap_status aap_dataset_load_libsvm(const char* path, const aap_libsvm_options* opts, aap_dataset** out);
AAP_API aap_status aap_dataset_synthetic_logistic(size_t n, size_t d, uint64_t seed, aap_dataset** out);
AAP_API aap_status aap_dataset_subsample(const aap_dataset* data, size_t n, uint64_t seed, aap_dataset** out);
AAP_API aap_status aap_dataset_shape(const aap_dataset* data, size_t* n, size_t* d);
AAP_API void aap_dataset_free(aap_dataset* data);

/* solving */
AAP_API aap_status aap_solve(const aap_problem* problem, aap_solver_kind kind, const aap_solver_options* opts,
                             const double* x0, aap_report** out);
AAP_API aap_status aap_report_status(const aap_report* report, aap_solve_status* status);
AAP_API size_t aap_report_num_records(const aap_report* report);
AAP_API aap_status aap_report_record(const aap_report* report, size_t i, aap_record* rec);
AAP_API size_t aap_report_g_evals(const aap_report* report);
AAP_API size_t aap_report_global_iters(const aap_report* report);
AAP_API aap_status aap_report_final_x(const aap_report* report, double* x, size_t d);
/* Problem metric at final_x; NaN when the problem defines none. */
AAP_API double aap_report_final_metric(const aap_report* report);
AAP_API void aap_report_free(aap_report* report);

/* traces */
AAP_API aap_status aap_trace_create(aap_trace** out);
AAP_API aap_status aap_trace_append(aap_trace* trace, const aap_report* report, const char* solver, size_t m,
                                    size_t run);
AAP_API size_t aap_trace_size(const aap_trace* trace);
AAP_API aap_status aap_trace_write_csv(const aap_trace* trace, const char* path);
AAP_API aap_status aap_trace_write_json(const aap_trace* trace, const char* path);
AAP_API void aap_trace_free(aap_trace* trace);

#ifdef __cplusplus
}
#endif

#endif /* AAP_AAP_H */
