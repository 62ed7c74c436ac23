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


#include "aap/aap.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "aap/diagnostics.hpp"
#include "aap/error.hpp"
#include "aap/fixedpoint.hpp"
#include "aap/ingest.hpp"
#include "aap/problems.hpp"
#include "aap/rng.hpp"

namespace {

// Largest dimension for which spectrum-based bounds are formed densely.
constexpr std::size_t kSpectralDiagnosticsMaxDim = 200;

enum class ProblemKind { Affine, Quadratic, Logistic, Nmf, Callback };

thread_local std::string g_last_error;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

struct aap_problem {
  ProblemKind kind = ProblemKind::Callback;
  aap::FixedPointMap map;
  aap::NmfShape nmf{};
  bool symmetric_jacobian = false;
};

struct aap_dataset {
  aap::LogisticDataset data;
};

struct aap_report {
  aap::SolveReport report;
  std::vector<double> metrics;  // per record, NaN when undefined
  std::vector<std::optional<aap::DiagnosticsRecord>> diagnostics;  // per record
  double final_metric = kNaN;
};

struct aap_trace {
  std::vector<aap::TraceRow> rows;
};

namespace {

aap_status fail(aap_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

aap_status to_status(aap::ErrorCode code) {
  switch (code) {
    case aap::ErrorCode::InvalidArgument: return AAP_ERR_INVALID_ARGUMENT;
    case aap::ErrorCode::DimensionMismatch: return AAP_ERR_DIMENSION;
    case aap::ErrorCode::Io: return AAP_ERR_IO;
    case aap::ErrorCode::Parse: return AAP_ERR_PARSE;
    case aap::ErrorCode::Numerical: return AAP_ERR_NUMERICAL;
  }
  return AAP_ERR_INTERNAL;
}

template <class F>
aap_status guarded(F&& body) {
  try {
    body();
    return AAP_OK;
  } catch (const aap::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AAP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AAP_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw aap::InvalidArgument(what);
}

template <class T>
aap_status emit(std::unique_ptr<T> obj, T** out) {
  *out = obj.release();
  return AAP_OK;
}

aap::Matrix copy_matrix(const double* a, std::size_t rows, std::size_t cols) {
  aap::Matrix m(rows, cols);
  std::memcpy(m.data().data(), a, sizeof(double) * rows * cols);
  return m;
}

aap_status make_problem(ProblemKind kind, aap::FixedPointMap map, aap_problem** out, bool symmetric = false) {
  auto p = std::make_unique<aap_problem>();
  p->kind = kind;
  p->map = std::move(map);
  p->symmetric_jacobian = symmetric;
  return emit(std::move(p), out);
}

aap::SolverConfig to_config(const aap_solver_options& o) {
  aap::SolverConfig cfg;
  cfg.m = o.m;
  cfg.beta = o.beta;
  cfg.tol = o.tol;
  cfg.relative_tol = o.relative_tol != 0;
  cfg.max_global_iters = o.max_global_iters;
  cfg.max_g_evals = o.max_g_evals;
  cfg.rank_tol = o.rank_tol;
  cfg.jvp_fd_step = o.jvp_fd_step;
  cfg.store_iterates = true;
  return cfg;
}

double opt_or_nan(const std::optional<double>& v) { return v ? *v : kNaN; }

}  // namespace

extern "C" {

const char* aap_version(void) { return "0.1.0"; }

const char* aap_last_error(void) { return g_last_error.c_str(); }

const char* aap_status_string(aap_status status) {
  switch (status) {
    case AAP_OK: return "ok";
    case AAP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AAP_ERR_DIMENSION: return "dimension mismatch";
    case AAP_ERR_IO: return "i/o error";
    case AAP_ERR_PARSE: return "parse error";
    case AAP_ERR_NUMERICAL: return "numerical error";
    case AAP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void aap_solver_options_default(aap_solver_options* opts) {
  if (!opts) return;
  const aap::SolverConfig cfg;
  opts->m = cfg.m;
  opts->beta = cfg.beta;
  opts->tol = cfg.tol;
  opts->relative_tol = cfg.relative_tol ? 1 : 0;
  opts->max_global_iters = cfg.max_global_iters;
  opts->max_g_evals = cfg.max_g_evals;
  opts->rank_tol = cfg.rank_tol;
  opts->jvp_fd_step = cfg.jvp_fd_step;
  opts->diagnostics = 0;
}

aap_status aap_solver_from_name(const char* name, aap_solver_kind* kind) {
  if (!name || !kind) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_solver_from_name: null argument");
  const std::string s(name);
  if (s == "picard") *kind = AAP_SOLVER_PICARD;
  else if (s == "aa") *kind = AAP_SOLVER_AA;
  else if (s == "resaa") *kind = AAP_SOLVER_RESAA;
  else if (s == "aap") *kind = AAP_SOLVER_AAP;
  else if (s == "newton_gmres") *kind = AAP_SOLVER_NEWTON_GMRES;
  else return fail(AAP_ERR_INVALID_ARGUMENT, "unknown solver '" + s + "'");
  return AAP_OK;
}

const char* aap_solver_name(aap_solver_kind kind) {
  switch (kind) {
    case AAP_SOLVER_PICARD: return "picard";
    case AAP_SOLVER_AA: return "aa";
    case AAP_SOLVER_RESAA: return "resaa";
    case AAP_SOLVER_AAP: return "aap";
    case AAP_SOLVER_NEWTON_GMRES: return "newton_gmres";
  }
  return "unknown";
}

const char* aap_solve_status_name(aap_solve_status status) {
  switch (status) {
    case AAP_SOLVE_CONVERGED: return "converged";
    case AAP_SOLVE_MAX_ITERS: return "max_iters";
    case AAP_SOLVE_BREAKDOWN: return "numerical_breakdown";
  }
  return "unknown";
}

aap_status aap_problem_affine(const double* a, const double* b, size_t d, aap_problem** out) {
  if (!a || !b || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_affine: null argument");
  return guarded([&] {
    require(d > 0, "aap_problem_affine: d must be positive");
    aap::Matrix am = copy_matrix(a, d, d);
    const bool symmetric = [&] {
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < j; ++i)
          if (am(i, j) != am(j, i)) return false;
      return true;
    }();
    make_problem(ProblemKind::Affine, aap::affine_map(am, aap::Vector(b, b + d)), out, symmetric);
  });
}

aap_status aap_problem_affine_random(size_t d, double norm, uint64_t seed, aap_problem** out) {
  if (!out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_affine_random: null argument");
  return guarded([&] {
    const aap::AffineProblem ap = aap::generate_gaussian_affine(d, norm, seed);
    make_problem(ProblemKind::Affine, aap::affine_map(ap.a, ap.b), out);
  });
}

aap_status aap_problem_quadratic(const double* c, size_t d, double scale, aap_problem** out) {
  if (!c || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_quadratic: null argument");
  return guarded([&] {
    require(d > 0, "aap_problem_quadratic: d must be positive");
    make_problem(ProblemKind::Quadratic, aap::quadratic_map(aap::Vector(c, c + d), scale), out, true);
  });
}

aap_status aap_problem_quadratic_random(size_t d, double scale, uint64_t seed, aap_problem** out) {
  if (!out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_quadratic_random: null argument");
  return guarded([&] {
    require(d > 0, "aap_problem_quadratic_random: d must be positive");
    aap::Rng rng(seed);
    aap::Vector x_star(d);
    for (double& v : x_star) v = 0.4 * rng.uniform();
    make_problem(ProblemKind::Quadratic, aap::quadratic_map(aap::quadratic_rhs(x_star), scale), out, true);
  });
}

aap_status aap_problem_logistic(const aap_dataset* data, double mu, double eta, aap_problem** out) {
  if (!data || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_logistic: null argument");
  return guarded([&] {
    make_problem(ProblemKind::Logistic, aap::logistic_gd_map(data->data, mu, eta), out, true);
  });
}

aap_status aap_problem_nmf(const double* a, size_t d1, size_t d2, size_t r, aap_problem** out) {
  if (!a || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_nmf: null argument");
  return guarded([&] {
    require(d1 > 0 && d2 > 0 && r > 0, "aap_problem_nmf: dimensions must be positive");
    auto p = std::make_unique<aap_problem>();
    p->kind = ProblemKind::Nmf;
    p->map = aap::nmf_annls_map(copy_matrix(a, d1, d2), r);
    p->nmf = {d1, d2, r};
    emit(std::move(p), out);
  });
}

aap_status aap_problem_nmf_synthetic(size_t d1, size_t d2, size_t r, uint64_t matrix_seed, aap_problem** out) {
  if (!out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_nmf_synthetic: null argument");
  return guarded([&] {
    auto p = std::make_unique<aap_problem>();
    p->kind = ProblemKind::Nmf;
    p->map = aap::nmf_annls_map(aap::make_synthetic_nmf(d1, d2, r, matrix_seed), r);
    p->nmf = {d1, d2, r};
    emit(std::move(p), out);
  });
}

aap_status aap_problem_callback(size_t d, aap_map_fn g, void* user, aap_problem** out) {
  if (!g || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_callback: null argument");
  return guarded([&] {
    require(d > 0, "aap_problem_callback: d must be positive");
    aap::FixedPointMap map;
    map.dimension = d;
    map.eval_g = [g, user, d](std::span<const double> x) {
      aap::Vector gx(d);
      if (g(user, x.data(), gx.data(), d) != 0) throw aap::NumericalError("callback map reported failure");
      return gx;
    };
    make_problem(ProblemKind::Callback, std::move(map), out);
  });
}

size_t aap_problem_dimension(const aap_problem* problem) { return problem ? problem->map.dimension : 0; }

aap_status aap_problem_default_x0(const aap_problem* problem, uint64_t seed, double* x0, size_t d) {
  if (!problem || !x0) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_default_x0: null argument");
  return guarded([&] {
    if (d != problem->map.dimension) throw aap::DimensionMismatch("aap_problem_default_x0: wrong length");
    if (problem->kind == ProblemKind::Nmf) {
      const aap::Vector v = aap::nmf_initial_point(problem->nmf, seed);
      std::copy(v.begin(), v.end(), x0);
    } else {
      std::fill(x0, x0 + d, 0.0);
    }
  });
}

aap_status aap_problem_eval_g(const aap_problem* problem, const double* x, double* gx, size_t d) {
  if (!problem || !x || !gx) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_problem_eval_g: null argument");
  return guarded([&] {
    if (d != problem->map.dimension) throw aap::DimensionMismatch("aap_problem_eval_g: wrong length");
    const aap::Vector v = problem->map.eval_g(std::span<const double>(x, d));
    std::copy(v.begin(), v.end(), gx);
  });
}

void aap_problem_free(aap_problem* problem) { delete problem; }

aap_status aap_dataset_load_libsvm(const char* path, const aap_libsvm_options* opts, aap_dataset** out) {
  if (!path || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_dataset_load_libsvm: null argument");
  return guarded([&] {
    aap::LibsvmOptions o;
    if (opts) {
      if (opts->use_binary_positive) o.binary_positive = opts->binary_positive;
      o.n_features = opts->n_features;
    }
    auto ds = std::make_unique<aap_dataset>();
    ds->data = aap::load_libsvm(path, o);
    emit(std::move(ds), out);
  });
}

aap_status aap_dataset_synthetic_logistic(size_t n, size_t d, uint64_t seed, aap_dataset** out) {
  if (!out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_dataset_synthetic_logistic: null argument");
  return guarded([&] {
    auto ds = std::make_unique<aap_dataset>();
    ds->data = aap::make_synthetic_logistic(n, d, seed);
    emit(std::move(ds), out);
  });
}

aap_status aap_dataset_subsample(const aap_dataset* data, size_t n, uint64_t seed, aap_dataset** out) {
  if (!data || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_dataset_subsample: null argument");
  return guarded([&] {
    auto ds = std::make_unique<aap_dataset>();
    ds->data = aap::subsample_rows(data->data, n, seed);
    emit(std::move(ds), out);
  });
}

aap_status aap_dataset_shape(const aap_dataset* data, size_t* n, size_t* d) {
  if (!data) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_dataset_shape: null argument");
  if (n) *n = data->data.size();
  if (d) *d = data->data.n_features;
  return AAP_OK;
}

void aap_dataset_free(aap_dataset* data) { delete data; }

aap_status aap_solve(const aap_problem* problem, aap_solver_kind kind, const aap_solver_options* opts,
                     const double* x0, aap_report** out) {
  if (!problem || !x0 || !out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_solve: null argument");
  return guarded([&] {
    aap_solver_options o;
    aap_solver_options_default(&o);
    if (opts) o = *opts;
    const aap::SolverConfig cfg = to_config(o);
    const aap::FixedPointMap& map = problem->map;
    const std::span<const double> x(x0, map.dimension);

    auto rep = std::make_unique<aap_report>();
    std::vector<aap::DiagnosticsRecord> diag;
    switch (kind) {
      case AAP_SOLVER_PICARD: rep->report = aap::run_picard(map, x, cfg); break;
      case AAP_SOLVER_AA: rep->report = aap::run_aa(map, x, cfg); break;
      case AAP_SOLVER_RESAA: rep->report = aap::run_res_aa(map, x, cfg); break;
      case AAP_SOLVER_NEWTON_GMRES: rep->report = aap::run_newton_gmres(map, x, cfg); break;
      case AAP_SOLVER_AAP:
        if (o.diagnostics) {
          aap::DiagnosticsOptions dopt;
          dopt.rank_tol = cfg.rank_tol;
          dopt.fd_step = cfg.jvp_fd_step;
          const bool spectral = problem->symmetric_jacobian && map.dimension <= kSpectralDiagnosticsMaxDim;
          dopt.spd_bound = spectral;
          dopt.vandermonde = spectral;
          aap::InstrumentedRun run = aap::run_aap_instrumented(map, x, cfg, dopt);
          rep->report = std::move(run.report);
          diag = std::move(run.diagnostics);
        } else {
          rep->report = aap::run_aap(map, x, cfg);
        }
        break;
      default: throw aap::InvalidArgument("aap_solve: unknown solver kind");
    }

    const auto& records = rep->report.records;
    rep->metrics.assign(records.size(), kNaN);
    rep->diagnostics.assign(records.size(), std::nullopt);
    if (map.metric) {
      for (std::size_t i = 0; i < records.size(); ++i)
        if (!records[i].x.empty()) rep->metrics[i] = map.metric(records[i].x);
      if (!rep->report.final_x.empty()) rep->final_metric = map.metric(rep->report.final_x);
    }
    // the mixing step of iteration t is reported on its last sweep record
    for (const aap::DiagnosticsRecord& d : diag) {
      for (std::size_t i = records.size(); i-- > 0;) {
        if (records[i].t == d.t && records[i].picard_substep == static_cast<int>(o.m)) {
          rep->diagnostics[i] = d;
          break;
        }
      }
    }
    emit(std::move(rep), out);
  });
}

aap_status aap_report_status(const aap_report* report, aap_solve_status* status) {
  if (!report || !status) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_report_status: null argument");
  switch (report->report.status) {
    case aap::SolveStatus::Converged: *status = AAP_SOLVE_CONVERGED; break;
    case aap::SolveStatus::MaxIters: *status = AAP_SOLVE_MAX_ITERS; break;
    case aap::SolveStatus::NumericalBreakdown: *status = AAP_SOLVE_BREAKDOWN; break;
  }
  return AAP_OK;
}

size_t aap_report_num_records(const aap_report* report) { return report ? report->report.records.size() : 0; }

aap_status aap_report_record(const aap_report* report, size_t i, aap_record* rec) {
  if (!report || !rec) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_report_record: null argument");
  if (i >= report->report.records.size()) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_report_record: index out of range");
  const aap::IterationRecord& r = report->report.records[i];
  rec->t = r.t;
  rec->picard_substep = r.picard_substep;
  rec->g_evals = r.g_evals_cumulative;
  rec->residual_norm = r.residual_norm;
  rec->theta = opt_or_nan(r.theta);
  rec->metric = report->metrics[i];
  const auto& d = report->diagnostics[i];
  rec->jac_gmres_gain = d ? d->jac_gmres_gain : kNaN;
  rec->et_norm = d ? d->et_norm : kNaN;
  rec->et_bound = d ? opt_or_nan(d->et_bound) : kNaN;
  rec->cond_s = d ? d->cond_s : kNaN;
  rec->cond_y = d ? d->cond_y : kNaN;
  rec->cond_g = d ? d->cond_g : kNaN;
  rec->s_minus_g_norm = d ? d->s_minus_g_norm : kNaN;
  rec->y_minus_jg_norm = d ? d->y_minus_jg_norm : kNaN;
  rec->sigma_min_y_over_f = d ? d->sigma_min_y_over_f : kNaN;
  rec->forcing_term = d ? d->forcing_term : kNaN;
  rec->spd_gain_upper = d ? opt_or_nan(d->spd_gain_upper) : kNaN;
  rec->vandermonde_upper = d ? opt_or_nan(d->vandermonde_upper) : kNaN;
  rec->b_inv_norm = d ? opt_or_nan(d->b_inv_norm) : kNaN;
  return AAP_OK;
}

size_t aap_report_g_evals(const aap_report* report) { return report ? report->report.g_evals : 0; }

size_t aap_report_global_iters(const aap_report* report) { return report ? report->report.global_iters : 0; }

aap_status aap_report_final_x(const aap_report* report, double* x, size_t d) {
  if (!report || !x) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_report_final_x: null argument");
  if (d != report->report.final_x.size()) return fail(AAP_ERR_DIMENSION, "aap_report_final_x: wrong length");
  std::copy(report->report.final_x.begin(), report->report.final_x.end(), x);
  return AAP_OK;
}

double aap_report_final_metric(const aap_report* report) { return report ? report->final_metric : kNaN; }

void aap_report_free(aap_report* report) { delete report; }

aap_status aap_trace_create(aap_trace** out) {
  if (!out) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_trace_create: null argument");
  return guarded([&] { emit(std::make_unique<aap_trace>(), out); });
}

aap_status aap_trace_append(aap_trace* trace, const aap_report* report, const char* solver, size_t m, size_t run) {
  if (!trace || !report || !solver) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_trace_append: null argument");
  return guarded([&] {
    const auto& records = report->report.records;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const aap::IterationRecord& r = records[i];
      aap::TraceRow row;
      row.solver = solver;
      row.m = m;
      row.run = run;
      row.t = r.t;
      row.picard_substep = r.picard_substep;
      row.g_evals = r.g_evals_cumulative;
      row.residual_norm = r.residual_norm;
      row.theta = r.theta;
      if (!std::isnan(report->metrics[i])) row.metric = report->metrics[i];
      if (report->diagnostics[i]) row.diagnostics = aap::to_trace_diagnostics(*report->diagnostics[i]);
      trace->rows.push_back(std::move(row));
    }
  });
}

size_t aap_trace_size(const aap_trace* trace) { return trace ? trace->rows.size() : 0; }

aap_status aap_trace_write_csv(const aap_trace* trace, const char* path) {
  if (!trace || !path) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_trace_write_csv: null argument");
  return guarded([&] { aap::write_trace_csv(trace->rows, std::string(path)); });
}

aap_status aap_trace_write_json(const aap_trace* trace, const char* path) {
  if (!trace || !path) return fail(AAP_ERR_INVALID_ARGUMENT, "aap_trace_write_json: null argument");
  return guarded([&] { aap::write_trace_json(trace->rows, std::string(path)); });
}

void aap_trace_free(aap_trace* trace) { delete trace; }

}  // extern "C"
