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


#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aap/aap.h"

namespace {

struct Scale {
  double factor;
  int calls = 0;
  bool fail = false;
};

int scale_map(void* user, const double* x, double* gx, size_t d) {
  auto* s = static_cast<Scale*>(user);
  ++s->calls;
  if (s->fail) return 1;
  for (size_t i = 0; i < d; ++i) gx[i] = s->factor * x[i] + 1.0;
  return 0;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "aap_test_capi";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("C API: names and defaults") {
  CHECK(std::strlen(aap_version()) > 0);
  aap_solver_options opts;
  aap_solver_options_default(&opts);
  CHECK(opts.m == 1);
  CHECK(opts.beta == 1.0);
  CHECK(opts.max_g_evals == 0);
  CHECK(opts.diagnostics == 0);

  aap_solver_kind kind;
  CHECK(aap_solver_from_name("aap", &kind) == AAP_OK);
  CHECK(kind == AAP_SOLVER_AAP);
  CHECK(aap_solver_from_name("newton_gmres", &kind) == AAP_OK);
  CHECK(kind == AAP_SOLVER_NEWTON_GMRES);
  CHECK(std::string(aap_solver_name(AAP_SOLVER_RESAA)) == "resaa");
  CHECK(aap_solver_from_name("bogus", &kind) == AAP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(aap_last_error()).find("bogus") != std::string::npos);
  CHECK(aap_solver_from_name(nullptr, &kind) == AAP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(aap_status_string(AAP_ERR_PARSE)).size() > 0);
  CHECK(std::string(aap_solve_status_name(AAP_SOLVE_CONVERGED)) == "converged");
}

TEST_CASE("C API: affine solve and records") {
  aap_problem* p = nullptr;
  REQUIRE(aap_problem_affine_random(20, 0.9, 1, &p) == AAP_OK);
  CHECK(aap_problem_dimension(p) == 20);
  std::vector<double> x0(20);
  REQUIRE(aap_problem_default_x0(p, 1, x0.data(), 20) == AAP_OK);

  aap_solver_options opts;
  aap_solver_options_default(&opts);
  opts.m = 5;
  opts.tol = 1e-10;
  opts.relative_tol = 1;

  aap_report* aap = nullptr;
  aap_report* picard = nullptr;
  REQUIRE(aap_solve(p, AAP_SOLVER_AAP, &opts, x0.data(), &aap) == AAP_OK);
  REQUIRE(aap_solve(p, AAP_SOLVER_PICARD, &opts, x0.data(), &picard) == AAP_OK);
  aap_solve_status st;
  REQUIRE(aap_report_status(aap, &st) == AAP_OK);
  CHECK(st == AAP_SOLVE_CONVERGED);
  REQUIRE(aap_report_status(picard, &st) == AAP_OK);
  CHECK(st == AAP_SOLVE_CONVERGED);
  CHECK(aap_report_g_evals(aap) < aap_report_g_evals(picard));
  CHECK(aap_report_g_evals(aap) <= 6 * (aap_report_global_iters(aap) + 1));

  const size_t n = aap_report_num_records(aap);
  REQUIRE(n > 0);
  aap_record rec;
  size_t prev_evals = 0;
  for (size_t i = 0; i < n; ++i) {
    REQUIRE(aap_report_record(aap, i, &rec) == AAP_OK);
    CHECK(rec.g_evals > prev_evals);
    prev_evals = rec.g_evals;
    CHECK(rec.picard_substep >= 0);
    CHECK(rec.picard_substep <= 5);
    // m + 1 evaluations per global iteration
    CHECK(rec.g_evals == 6 * rec.t + static_cast<size_t>(rec.picard_substep) + 1);
    CHECK(std::isnan(rec.et_norm));  // diagnostics off
  }
  CHECK(aap_report_record(aap, n, &rec) == AAP_ERR_INVALID_ARGUMENT);

  // the final point solves x = g(x)
  std::vector<double> x(20), gx(20);
  REQUIRE(aap_report_final_x(aap, x.data(), 20) == AAP_OK);
  REQUIRE(aap_problem_eval_g(p, x.data(), gx.data(), 20) == AAP_OK);
  double res = 0.0;
  for (size_t i = 0; i < 20; ++i) res += (gx[i] - x[i]) * (gx[i] - x[i]);
  CHECK(std::sqrt(res) <= 1e-8);
  CHECK(aap_report_final_x(aap, x.data(), 19) == AAP_ERR_DIMENSION);

  aap_report_free(aap);
  aap_report_free(picard);
  aap_problem_free(p);
}

TEST_CASE("C API: diagnostics on a quadratic map") {
  aap_problem* p = nullptr;
  REQUIRE(aap_problem_quadratic_random(8, 0.2, 7, &p) == AAP_OK);
  aap_solver_options opts;
  aap_solver_options_default(&opts);
  opts.m = 2;
  opts.tol = 5e-8;
  opts.diagnostics = 1;
  std::vector<double> x0(8, 0.0);
  aap_report* r = nullptr;
  REQUIRE(aap_solve(p, AAP_SOLVER_AAP, &opts, x0.data(), &r) == AAP_OK);
  size_t with_diag = 0;
  aap_record rec;
  for (size_t i = 0; i < aap_report_num_records(r); ++i) {
    REQUIRE(aap_report_record(r, i, &rec) == AAP_OK);
    if (rec.picard_substep != 2) {
      CHECK(std::isnan(rec.et_norm));
      continue;
    }
    ++with_diag;
    CHECK(std::isfinite(rec.theta));
    CHECK(std::isfinite(rec.et_norm));
    CHECK(std::isfinite(rec.et_bound));
    CHECK(std::isfinite(rec.b_inv_norm));
    CHECK(std::isfinite(rec.vandermonde_upper));
    CHECK(rec.et_norm <= rec.et_bound);
  }
  CHECK(with_diag > 0);
  CHECK(with_diag <= aap_report_global_iters(r));
  aap_report_free(r);
  aap_problem_free(p);
}

TEST_CASE("C API: callback maps and their failures") {
  Scale s{0.5};
  aap_problem* p = nullptr;
  REQUIRE(aap_problem_callback(3, scale_map, &s, &p) == AAP_OK);
  aap_solver_options opts;
  aap_solver_options_default(&opts);
  opts.m = 2;
  opts.tol = 1e-12;
  const double x0[3] = {0.0, 0.0, 0.0};
  aap_report* r = nullptr;
  REQUIRE(aap_solve(p, AAP_SOLVER_AA, &opts, x0, &r) == AAP_OK);
  double x[3];
  REQUIRE(aap_report_final_x(r, x, 3) == AAP_OK);
  for (double v : x) CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(static_cast<size_t>(s.calls) == aap_report_g_evals(r));
  aap_report_free(r);

  // a failing callback is a recorded breakdown, not an API error
  s.fail = true;
  r = nullptr;
  REQUIRE(aap_solve(p, AAP_SOLVER_PICARD, &opts, x0, &r) == AAP_OK);
  aap_solve_status st;
  REQUIRE(aap_report_status(r, &st) == AAP_OK);
  CHECK(st == AAP_SOLVE_BREAKDOWN);
  aap_report_free(r);
  CHECK(aap_problem_eval_g(p, x0, x, 3) == AAP_ERR_NUMERICAL);
  CHECK(std::string(aap_last_error()).find("callback") != std::string::npos);
  aap_problem_free(p);
  CHECK(aap_problem_callback(3, nullptr, nullptr, &p) == AAP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("C API: argument validation") {
  aap_problem* p = nullptr;
  CHECK(aap_problem_affine_random(0, 0.9, 1, &p) == AAP_ERR_INVALID_ARGUMENT);
  CHECK(aap_problem_affine_random(4, 0.9, 1, nullptr) == AAP_ERR_INVALID_ARGUMENT);
  REQUIRE(aap_problem_affine_random(4, 0.9, 1, &p) == AAP_OK);
  aap_solver_options opts;
  aap_solver_options_default(&opts);
  opts.m = 5;  // larger than d
  const double x0[4] = {0, 0, 0, 0};
  aap_report* r = nullptr;
  CHECK(aap_solve(p, AAP_SOLVER_AAP, &opts, x0, &r) == AAP_ERR_INVALID_ARGUMENT);
  opts.m = 2;
  CHECK(aap_solve(p, AAP_SOLVER_AAP, &opts, nullptr, &r) == AAP_ERR_INVALID_ARGUMENT);
  CHECK(aap_solve(nullptr, AAP_SOLVER_AAP, &opts, x0, &r) == AAP_ERR_INVALID_ARGUMENT);
  CHECK(aap_solve(p, static_cast<aap_solver_kind>(42), &opts, x0, &r) == AAP_ERR_INVALID_ARGUMENT);
  std::vector<double> bad(4, NAN);
  CHECK(aap_problem_eval_g(p, bad.data(), bad.data(), 3) == AAP_ERR_DIMENSION);
  aap_problem_free(p);
  aap_problem_free(nullptr);
  aap_report_free(nullptr);
  aap_dataset_free(nullptr);
  aap_trace_free(nullptr);

  const double neg[4] = {1.0, -1.0, 1.0, 1.0};
  CHECK(aap_problem_nmf(neg, 2, 2, 1, &p) == AAP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("C API: datasets and logistic problems") {
  const auto path = scratch("data.svm");
  std::ofstream(path) << "1 1:0.5 2:1\n2 2:-1\n1 3:0.25\n";
  aap_dataset* data = nullptr;
  aap_libsvm_options lo{1, 2.0, 0};
  REQUIRE(aap_dataset_load_libsvm(path.string().c_str(), &lo, &data) == AAP_OK);
  size_t n = 0, d = 0;
  REQUIRE(aap_dataset_shape(data, &n, &d) == AAP_OK);
  CHECK(n == 3);
  CHECK(d == 3);
  aap_dataset_free(data);

  std::ofstream(path) << "1 2:1 1:1\n";
  CHECK(aap_dataset_load_libsvm(path.string().c_str(), nullptr, &data) == AAP_ERR_PARSE);
  CHECK(std::string(aap_last_error()).find("line 1") != std::string::npos);
  CHECK(aap_dataset_load_libsvm(scratch("nope/none.svm").string().c_str(), nullptr, &data) == AAP_ERR_IO);

  REQUIRE(aap_dataset_synthetic_logistic(300, 10, 2, &data) == AAP_OK);
  aap_dataset* sub = nullptr;
  REQUIRE(aap_dataset_subsample(data, 100, 3, &sub) == AAP_OK);
  REQUIRE(aap_dataset_shape(sub, &n, &d) == AAP_OK);
  CHECK(n == 100);
  CHECK(d == 10);

  aap_problem* p = nullptr;
  REQUIRE(aap_problem_logistic(data, 0.01, 1.0, &p) == AAP_OK);
  aap_dataset_free(data);  // the problem keeps its own copy
  aap_dataset_free(sub);
  aap_solver_options opts;
  aap_solver_options_default(&opts);
  opts.m = 3;
  opts.tol = 1e-8;
  opts.relative_tol = 1;
  std::vector<double> x0(10, 0.0);
  aap_report* r = nullptr;
  REQUIRE(aap_solve(p, AAP_SOLVER_NEWTON_GMRES, &opts, x0.data(), &r) == AAP_OK);
  aap_solve_status st;
  REQUIRE(aap_report_status(r, &st) == AAP_OK);
  CHECK(st == AAP_SOLVE_CONVERGED);
  CHECK(std::isfinite(aap_report_final_metric(r)));
  aap_report_free(r);
  aap_problem_free(p);
}

TEST_CASE("C API: NMF and traces") {
  aap_problem* p = nullptr;
  REQUIRE(aap_problem_nmf_synthetic(30, 10, 2, 4, &p) == AAP_OK);
  const size_t d = aap_problem_dimension(p);
  CHECK(d == 80);
  std::vector<double> x0(d);
  REQUIRE(aap_problem_default_x0(p, 5, x0.data(), d) == AAP_OK);
  aap_solver_options opts;
  aap_solver_options_default(&opts);
  opts.m = 3;
  opts.tol = 1e-300;
  opts.max_g_evals = 40;
  aap_report* r = nullptr;
  REQUIRE(aap_solve(p, AAP_SOLVER_AAP, &opts, x0.data(), &r) == AAP_OK);
  CHECK(aap_report_g_evals(r) <= 40);
  aap_record rec;
  REQUIRE(aap_report_record(r, 0, &rec) == AAP_OK);
  CHECK(rec.metric > 0.0);
  CHECK(rec.metric < 1.0);

  aap_trace* tr = nullptr;
  REQUIRE(aap_trace_create(&tr) == AAP_OK);
  REQUIRE(aap_trace_append(tr, r, "aap", 3, 0) == AAP_OK);
  CHECK(aap_trace_size(tr) == aap_report_num_records(r));
  const auto csv = scratch("t.csv");
  const auto json = scratch("t.json");
  REQUIRE(aap_trace_write_csv(tr, csv.string().c_str()) == AAP_OK);
  REQUIRE(aap_trace_write_json(tr, json.string().c_str()) == AAP_OK);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "solver,m,run,t,picard_substep,g_evals,residual_norm,theta,metric");
  CHECK(aap_trace_append(tr, r, "bad,name", 3, 0) == AAP_OK);
  CHECK(aap_trace_write_csv(tr, csv.string().c_str()) == AAP_ERR_INVALID_ARGUMENT);
  const auto blocked = scratch("file_not_dir");
  std::ofstream(blocked) << "x";
  CHECK(aap_trace_write_json(tr, (blocked / "t.json").string().c_str()) == AAP_ERR_IO);
  aap_trace_free(tr);
  aap_report_free(r);
  aap_problem_free(p);
}
