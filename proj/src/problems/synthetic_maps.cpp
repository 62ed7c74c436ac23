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


#include <cmath>
#include <numbers>

#include "aap/error.hpp"
#include "aap/problems.hpp"

namespace aap {

FixedPointMap affine_map(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw DimensionMismatch("affine_map: A must be d x d and b length d");
  auto shared = std::make_shared<const std::pair<Matrix, Vector>>(a, b);
  FixedPointMap map;
  map.dimension = b.size();
  map.eval_g = [shared](std::span<const double> x) { return add(multiply(shared->first, x), shared->second); };
  map.eval_f = [shared](std::span<const double> x) {
    Vector f = multiply(shared->first, x);
    axpy(-1.0, x, f);
    axpy(1.0, shared->second, f);
    return f;
  };
  map.jvp_f = [shared](std::span<const double> /*x*/, std::span<const double> v) {
    Vector out = multiply(shared->first, v);
    axpy(-1.0, v, out);
    return out;
  };
  map.kappa = a.empty() ? 0.0 : spectral_norm(a);
  map.gamma = 0.0;
  return map;
}

Matrix quadratic_coupling(std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    m(i, i) = 2.2;
    if (i + 1 < d) {
      m(i, i + 1) = -1.0;
      m(i + 1, i) = -1.0;
    }
  }
  return m;
}

std::pair<double, double> quadratic_coupling_extremes(std::size_t d) {
  // tridiag(-1, 2, -1) has eigenvalues 2 - 2 cos(k pi / (d + 1)), k = 1..d
  const double h = std::numbers::pi / static_cast<double>(d + 1);
  return {0.2 + 2.0 - 2.0 * std::cos(h), 0.2 + 2.0 - 2.0 * std::cos(static_cast<double>(d) * h)};
}

namespace {

// x .* x + M x - c, with M applied as a stencil
Vector quadratic_residual_core(std::span<const double> x, std::span<const double> c) {
  const std::size_t d = x.size();
  Vector r(d);
  for (std::size_t i = 0; i < d; ++i) {
    double mx = 2.2 * x[i];
    if (i > 0) mx -= x[i - 1];
    if (i + 1 < d) mx -= x[i + 1];
    r[i] = x[i] * x[i] + mx - c[i];
  }
  return r;
}

}  // namespace

Vector quadratic_rhs(std::span<const double> x_star) {
  const Vector zero(x_star.size(), 0.0);
  return quadratic_residual_core(x_star, zero);
}

FixedPointMap quadratic_map(const Vector& c, double scale) {
  if (c.empty()) throw InvalidArgument("quadratic_map: empty right-hand side");
  if (!(scale > 0.0)) throw InvalidArgument("quadratic_map: scale must be positive");
  auto shared = std::make_shared<const Vector>(c);
  FixedPointMap map;
  map.dimension = c.size();
  map.eval_f = [shared, scale](std::span<const double> x) {
    if (x.size() != shared->size()) throw DimensionMismatch("quadratic_map: x length");
    return scaled(-scale, quadratic_residual_core(x, *shared));
  };
  map.eval_g = [shared, scale](std::span<const double> x) {
    if (x.size() != shared->size()) throw DimensionMismatch("quadratic_map: x length");
    Vector g(x.begin(), x.end());
    axpy(-scale, quadratic_residual_core(x, *shared), g);
    return g;
  };
  map.jvp_f = [scale](std::span<const double> x, std::span<const double> v) {
    const std::size_t d = x.size();
    Vector out(d);
    for (std::size_t i = 0; i < d; ++i) {
      double mv = 2.2 * v[i];
      if (i > 0) mv -= v[i - 1];
      if (i + 1 < d) mv -= v[i + 1];
      out[i] = -scale * (2.0 * x[i] * v[i] + mv);
    }
    return out;
  };
  map.gamma = 2.0 * scale;
  return map;
}

double quadratic_kappa_on_box(std::size_t d, double scale, double lo, double hi) {
  if (lo > hi) throw InvalidArgument("quadratic_kappa_on_box: lo > hi");
  // g'(x) = I - scale (2 diag(x) + M) is symmetric; Weyl brackets its spectrum
  const auto [mlo, mhi] = quadratic_coupling_extremes(d);
  const double a = 1.0 - scale * (mlo + 2.0 * lo);
  const double b = 1.0 - scale * (mhi + 2.0 * hi);
  return std::max(std::fabs(a), std::fabs(b));
}

}  // namespace aap
