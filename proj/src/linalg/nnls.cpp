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


#include <algorithm>
#include <cmath>

#include "aap/error.hpp"
#include "aap/linalg.hpp"

namespace aap {

namespace {

Matrix select_columns(const Matrix& a, const std::vector<std::size_t>& idx) {
  Matrix s(a.rows(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) s.set_col(j, a.col(idx[j]));
  return s;
}

Vector negative_gradient(const Matrix& a, std::span<const double> b, const Vector& x) {
  Vector res(b.begin(), b.end());
  const Vector ax = multiply(a, x);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= ax[i];
  return multiply_transpose(a, res);
}

}  // namespace

Vector nnls(const Matrix& a, std::span<const double> b) {
  if (a.rows() != b.size()) throw DimensionMismatch("nnls: A.rows != b.length");
  const std::size_t n = a.cols();
  Vector x(n, 0.0);
  if (n == 0) return x;

  const double scale = norm2(multiply_transpose(a, b));
  if (scale == 0.0) return x;
  const double tol = 1e-10 * scale;

  std::vector<bool> passive(n, false);
  std::vector<bool> blocked(n, false);
  Vector w = negative_gradient(a, b, x);
  const std::size_t max_outer = 3 * n;

  for (std::size_t outer = 0;; ++outer) {
    std::size_t j = n;
    double wmax = tol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!passive[i] && !blocked[i] && w[i] > wmax) {
        wmax = w[i];
        j = i;
      }
    }
    if (j == n) return x;
    if (outer >= max_outer) throw NnlsNotConverged("nnls: active-set iteration limit reached", x);
    passive[j] = true;

    for (std::size_t inner = 0; inner <= n; ++inner) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (passive[i]) idx.push_back(i);
      const LsSolution ls = qr_least_squares(select_columns(a, idx), b);
      Vector z(n, 0.0);
      for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = ls.solution[k];

      if (inner == 0 && z[j] <= 0.0) {
        // round-off made the entering column useless; keep it out for now
        passive[j] = false;
        blocked[j] = true;
        break;
      }
      bool feasible = true;
      double step = 1.0;
      for (std::size_t i : idx) {
        if (z[i] <= 0.0) {
          feasible = false;
          const double denom = x[i] - z[i];
          if (denom > 0.0) step = std::min(step, x[i] / denom);
        }
      }
      if (feasible) {
        x = std::move(z);
        std::fill(blocked.begin(), blocked.end(), false);
        break;
      }
      for (std::size_t i : idx) {
        x[i] += step * (z[i] - x[i]);
        if (x[i] <= 1e-15 * std::max(1.0, std::fabs(z[i]))) {
          x[i] = 0.0;
          passive[i] = false;
        }
      }
    }
    w = negative_gradient(a, b, x);
  }
}

}  // namespace aap
