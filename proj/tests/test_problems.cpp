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

#include <algorithm>
#include <cmath>

#include "aap/error.hpp"
#include "aap/fixedpoint.hpp"
#include "aap/problems.hpp"
#include "oracles.hpp"

using namespace aap;

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Vector residual(const FixedPointMap& map, std::span<const double> x) { return evaluate(map, x).f; }

// Central difference of f along v.
Vector central_difference(const FixedPointMap& map, const Vector& x, const Vector& v, double eps) {
  Vector xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += eps * v[i];
    xm[i] -= eps * v[i];
  }
  const Vector fp = residual(map, xp), fm = residual(map, xm);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * eps);
  return out;
}

// Count of singular values above rel_tol times the largest.
std::size_t numerical_rank(const Matrix& a, double rel_tol) {
  const Vector sv = singular_values(a);
  std::size_t r = 0;
  for (double s : sv)
    if (s > rel_tol * sv.front()) ++r;
  return r;
}

LogisticDataset single_row_dataset() {
  LogisticDataset data;
  data.n_features = 3;
  data.rows.push_back({{0}, {1.0}});
  data.labels.push_back(1);
  return data;
}

}  // namespace

TEST_CASE("logistic_gd_map: gradient at zero for one sample") {
  for (double eta : {1.0, 0.3}) {
    const FixedPointMap map = logistic_gd_map(single_row_dataset(), 0.01, eta);
    const Vector g = map.eval_g(Vector(3, 0.0));
    CHECK(g[0] == doctest::Approx(0.5 * eta).epsilon(1e-14));
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
  }
}

TEST_CASE("logistic_gd_map: zero features give a linear contraction") {
  LogisticDataset data;
  data.n_features = 4;
  for (int i = 0; i < 5; ++i) {
    data.rows.push_back({});
    data.labels.push_back(i % 2 ? 1 : -1);
  }
  const double mu = 0.2, eta = 1.5;
  const FixedPointMap map = logistic_gd_map(data, mu, eta);
  const Vector x{1.0, -2.0, 0.5, 3.0};
  const Vector g = map.eval_g(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(g[i] == doctest::Approx((1.0 - eta * mu) * x[i]).epsilon(1e-14));
  REQUIRE(map.kappa.has_value());
  CHECK(*map.kappa == doctest::Approx(std::fabs(1.0 - eta * mu)));
}

TEST_CASE("logistic_gd_map: analytic JVP matches central differences") {
  const FixedPointMap map = logistic_gd_map(make_synthetic_logistic(100, 12, 3), 0.01, 1.0);
  oracle::TestRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = rng.normal_vector(12);
    const Vector v = rng.normal_vector(12);
    const Vector jv = map.jvp_f(x, v);
    const Vector fd = central_difference(map, x, v, 1e-5);
    CHECK(oracle::vnorm(oracle::vsub(jv, fd)) <= 1e-6 * oracle::vnorm(v));
  }
}

TEST_CASE("logistic_gd_map: loss gradient matches finite differences of the loss") {
  const LogisticDataset data = make_synthetic_logistic(50, 6, 8);
  oracle::TestRng rng(9);
  const Vector x = rng.normal_vector(6);
  const Vector grad = logistic_gradient(data, 0.05, x);
  for (std::size_t i = 0; i < 6; ++i) {
    Vector xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fd = (logistic_loss(data, 0.05, xp) - logistic_loss(data, 0.05, xm)) / 2e-6;
    CHECK(std::fabs(fd - grad[i]) <= 1e-8);
  }
  // stable form for large margins
  const Vector big(6, 1e3);
  CHECK(std::isfinite(logistic_loss(data, 0.05, big)));
}

TEST_CASE("logistic_gd_map: sampled pairs contract with eta = 1") {
  const double mu = 0.01;
  const LogisticDataset data = make_synthetic_logistic(500, 20, 1);
  const FixedPointMap map = logistic_gd_map(data, mu, 1.0);
  REQUIRE(map.kappa.has_value());
  CHECK(*map.kappa <= 1.0);
  CHECK(mu <= logistic_smoothness(data, mu, Vector(20, 0.0)));
  oracle::TestRng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = rng.normal_vector(20);
    const Vector y = rng.normal_vector(20);
    const double lhs = oracle::vnorm(oracle::vsub(map.eval_g(x), map.eval_g(y)));
    CHECK(lhs <= (1.0 + 1e-12) * oracle::vnorm(oracle::vsub(x, y)));
  }
}

TEST_CASE("logistic_gd_map: preconditions") {
  CHECK_THROWS_AS(logistic_gd_map(LogisticDataset{}, 0.01, 1.0), InvalidArgument);
  CHECK_THROWS_AS(logistic_gd_map(single_row_dataset(), 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(logistic_gd_map(single_row_dataset(), 0.01, 0.0), InvalidArgument);
  LogisticDataset bad = single_row_dataset();
  bad.labels[0] = 2;
  CHECK_THROWS_AS(logistic_gd_map(bad, 0.01, 1.0), InvalidArgument);
  bad = single_row_dataset();
  bad.rows[0].index[0] = 3;
  CHECK_THROWS_AS(logistic_gd_map(bad, 0.01, 1.0), InvalidArgument);
}

TEST_CASE("affine_map: trivial fixed points and metadata") {
  const Vector b{1.0, -2.0, 3.0};
  FixedPointMap map = affine_map(Matrix(3, 3), b);
  SolverConfig cfg;
  cfg.tol = 1e-14;
  SolveReport rep = run_picard(map, Vector(3, 0.0), cfg);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(rep.final_x == b);
  CHECK(*map.kappa == 0.0);
  CHECK(*map.gamma == 0.0);

  Matrix half = Matrix::identity(3);
  for (double& e : half.data()) e *= 0.5;
  map = affine_map(half, Vector(3, 1.0));
  cfg.tol = 1e-13;
  rep = run_picard(map, Vector(3, 0.0), cfg);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(max_abs_diff(rep.final_x, Vector(3, 2.0)) <= 1e-12);
  CHECK(*map.kappa == doctest::Approx(0.5));
  const Vector v{1.0, 2.0, 3.0};
  CHECK(map.jvp_f(Vector(3, 0.0), v) == Vector{-0.5, -1.0, -1.5});
}

TEST_CASE("affine_map: Picard converges iff the scaled orthogonal A is contractive") {
  oracle::TestRng rng(21);
  for (double norm : {0.5, 0.95, 1.05, 1.5}) {
    Matrix a = oracle::orthogonal(6, rng);
    for (double& e : a.data()) e *= norm;
    const FixedPointMap map = affine_map(a, rng.normal_vector(6));
    CHECK(*map.kappa == doctest::Approx(norm).epsilon(1e-12));
    SolverConfig cfg;
    cfg.tol = 1e-8;
    cfg.relative_tol = true;
    cfg.max_global_iters = 2000;
    const SolveReport rep = run_picard(map, Vector(6, 0.0), cfg);
    CHECK((rep.status == SolveStatus::Converged) == (norm < 1.0));
  }
}

TEST_CASE("quadratic_map: zero fixed point and Jacobian") {
  const Vector c(5, 0.0);
  const FixedPointMap map = quadratic_map(c, 0.2);
  CHECK(map.eval_g(Vector(5, 0.0)) == Vector(5, 0.0));
  CHECK(*map.gamma == 0.4);

  oracle::TestRng rng(2);
  const Vector x_star = rng.uniform_vector(5, 0.0, 0.4);
  const FixedPointMap q = quadratic_map(quadratic_rhs(x_star), 0.2);
  CHECK(oracle::vnorm(residual(q, x_star)) <= 1e-14);
  const Vector x = rng.normal_vector(5), v = rng.normal_vector(5);
  CHECK(oracle::vnorm(oracle::vsub(q.jvp_f(x, v), central_difference(q, x, v, 1e-5))) <= 1e-8 * oracle::vnorm(v));

  const Matrix mm = quadratic_coupling(5);
  CHECK(mm(0, 0) == doctest::Approx(2.2));
  CHECK(mm(1, 0) == -1.0);
  CHECK(mm(0, 2) == 0.0);
  const auto [lo, hi] = quadratic_coupling_extremes(5);
  const SymmetricEigen es = symmetric_eigen(mm);
  CHECK(lo == doctest::Approx(es.values.front()));
  CHECK(hi == doctest::Approx(es.values.back()));
}

TEST_CASE("quadratic_map: Jacobian Lipschitz constant on random pairs") {
  const std::size_t d = 8;
  const double scale = 0.15;
  oracle::TestRng rng(4);
  const FixedPointMap map = quadratic_map(rng.normal_vector(d), scale);
  const auto jac = [&](const Vector& x) {
    Matrix j(d, d);
    for (std::size_t k = 0; k < d; ++k) {
      Vector e(d, 0.0);
      e[k] = 1.0;
      j.set_col(k, map.jvp_f(x, e));
    }
    return j;
  };
  for (int trial = 0; trial < 30; ++trial) {
    const Vector x = rng.normal_vector(d), y = rng.normal_vector(d);
    Matrix diff = jac(x);
    const Matrix jy = jac(y);
    for (std::size_t i = 0; i < diff.data().size(); ++i) diff.data()[i] -= jy.data()[i];
    const double lhs = oracle::spectral_norm(diff);
    const double max_diff = max_abs_diff(x, y);
    CHECK(lhs == doctest::Approx(2.0 * scale * max_diff).epsilon(1e-8));
    CHECK(lhs <= *map.gamma * oracle::vnorm(oracle::vsub(x, y)) + 1e-12);
  }
}

TEST_CASE("quadratic_map: Gershgorin contraction near the fixed point") {
  const std::size_t d = 8;
  const double scale = 0.2;
  // g'(x) = I - scale (2 diag(x) + M); Gershgorin discs of row i
  const auto gershgorin = [&](const Vector& x) {
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double centre = 1.0 - scale * (2.0 * x[i] + 2.2);
      const double radius = scale * ((i > 0) + (i + 1 < d));
      worst = std::max(worst, std::fabs(centre) + radius);
    }
    return worst;
  };
  oracle::TestRng rng(7);
  const Vector x_star = rng.uniform_vector(d, 0.0, 0.4);
  CHECK(gershgorin(x_star) < 1.0);
  const double box = quadratic_kappa_on_box(d, scale, 0.0, 0.4);
  CHECK(box < 1.0);
  // Weyl bound over the box never exceeds the worse corner's Gershgorin bound
  CHECK(box <= std::max(gershgorin(Vector(d, 0.0)), gershgorin(Vector(d, 0.4))) + 1e-12);
  FixedPointMap map = quadratic_map(quadratic_rhs(x_star), scale);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = rng.uniform_vector(d, 0.0, 0.4), y = rng.uniform_vector(d, 0.0, 0.4);
    CHECK(oracle::vnorm(oracle::vsub(map.eval_g(x), map.eval_g(y))) <= box * oracle::vnorm(oracle::vsub(x, y)) + 1e-14);
  }
}

TEST_CASE("make_synthetic_nmf: shape, rank and determinism") {
  const Matrix a = make_synthetic_nmf(300, 50, 4, 1);
  CHECK(a.rows() == 300);
  CHECK(a.cols() == 50);
  CHECK(numerical_rank(a, 1e-10) <= 4);
  CHECK(std::all_of(a.data().begin(), a.data().end(), [](double v) { return v >= 0.0; }));
  CHECK(numerical_rank(make_synthetic_nmf(20, 10, 1, 3), 1e-12) == 1);
  const Matrix b = make_synthetic_nmf(300, 50, 4, 1);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  const Matrix c = make_synthetic_nmf(300, 50, 4, 2);
  CHECK(!std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST_CASE("nmf_annls_map: exact factors are a fixed point") {
  const NmfShape shape{30, 12, 3};
  oracle::TestRng rng(5);
  Matrix w(shape.d1, shape.r), h(shape.r, shape.d2);
  for (double& e : w.data()) e = 0.1 + rng.uniform();
  for (double& e : h.data()) e = 0.1 + rng.uniform();
  const Matrix a = multiply(w, h);
  const FixedPointMap map = nmf_annls_map(a, shape.r);
  const Vector x1 = map.eval_g(pack_nmf(w, h));
  CHECK(nmf_relative_residual(a, x1, shape.r) <= 1e-12);
  // the normalised pair maps to itself
  const Vector x2 = map.eval_g(x1);
  CHECK(max_abs_diff(x1, x2) <= 1e-10 * (1.0 + oracle::vnorm(x1)));
}

TEST_CASE("nmf_annls_map: rank-one factorisation") {
  oracle::TestRng rng(6);
  Vector u(15), v(9);
  for (double& e : u) e = rng.uniform();
  for (double& e : v) e = rng.uniform();
  Matrix a(15, 9);
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = 0; j < 9; ++j) a(i, j) = u[i] * v[j];
  const FixedPointMap map = nmf_annls_map(a, 1);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_global_iters = 50;
  const SolveReport rep = run_picard(map, nmf_initial_point({15, 9, 1}, 2), cfg);
  CHECK(nmf_relative_residual(a, rep.final_x, 1) <= 1e-8);
}

TEST_CASE("nmf_annls_map: sweeps are monotone and nonnegative") {
  const NmfShape shape{40, 20, 4};
  const Matrix a = make_synthetic_nmf(shape.d1, shape.d2, shape.r, 3);
  auto events = std::make_shared<NmfEvents>();
  const FixedPointMap map = nmf_annls_map(a, shape.r, events);
  Vector x = nmf_initial_point(shape, 4);
  double prev = nmf_relative_residual(a, x, shape.r);
  for (int sweep = 0; sweep < 25; ++sweep) {
    x = map.eval_g(x);
    const double cur = nmf_relative_residual(a, x, shape.r);
    CHECK(cur <= prev * (1.0 + 1e-12) + 1e-15);
    CHECK(std::all_of(x.begin(), x.end(), [](double e) { return e >= 0.0; }));
    prev = cur;
  }

  // AAP iterates stay nonnegative through post-mix clipping
  SolverConfig cfg;
  cfg.m = 3;
  cfg.max_g_evals = 60;
  cfg.tol = 1e-300;
  const SolveReport rep = run_aap(map, nmf_initial_point(shape, 5), cfg);
  for (const IterationRecord& r : rep.records)
    CHECK(std::all_of(r.x.begin(), r.x.end(), [](double e) { return e >= 0.0; }));
  CHECK(events->reseeded_columns.load() == 0);
}

TEST_CASE("nmf_annls_map: zero columns are reseeded and flagged") {
  const NmfShape shape{6, 5, 2};
  const Matrix a = make_synthetic_nmf(shape.d1, shape.d2, shape.r, 8);
  auto events = std::make_shared<NmfEvents>();
  const FixedPointMap map = nmf_annls_map(a, shape.r, events);
  Vector x = nmf_initial_point(shape, 9);
  for (std::size_t i = 0; i < shape.d1; ++i) x[i] = 0.0;  // first W column
  const Vector g = map.eval_g(x);
  CHECK(events->reseeded_columns.load() == 1);
  CHECK(std::all_of(g.begin(), g.end(), [](double e) { return e >= 0.0 && std::isfinite(e); }));
}

TEST_CASE("nmf_annls_map: preconditions") {
  const Matrix a = make_synthetic_nmf(5, 4, 2, 1);
  CHECK_THROWS_AS(nmf_annls_map(a, 0), InvalidArgument);
  CHECK_THROWS_AS(nmf_annls_map(a, 5), InvalidArgument);
  Matrix neg = a;
  neg(0, 0) = -1.0;
  CHECK_THROWS_AS(nmf_annls_map(neg, 2), InvalidArgument);
}
