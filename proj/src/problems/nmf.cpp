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
#include "aap/problems.hpp"
#include "aap/rng.hpp"

namespace aap {

Matrix make_synthetic_nmf(std::size_t d1, std::size_t d2, std::size_t r, std::uint64_t seed) {
  if (d1 == 0 || d2 == 0 || r == 0) throw InvalidArgument("make_synthetic_nmf: dimensions must be positive");
  Rng rng(seed);
  Matrix w(d1, r);
  Matrix h(r, d2);
  for (double& e : w.data()) e = rng.uniform();
  for (double& e : h.data()) e = rng.uniform();
  return multiply(w, h);
}

Vector pack_nmf(const Matrix& w, const Matrix& h) {
  if (w.cols() != h.rows()) throw DimensionMismatch("pack_nmf: inner dimensions differ");
  Vector x(w.data().begin(), w.data().end());
  x.insert(x.end(), h.data().begin(), h.data().end());
  return x;
}

std::pair<Matrix, Matrix> unpack_nmf(std::span<const double> x, const NmfShape& shape) {
  if (x.size() != shape.dimension()) throw DimensionMismatch("unpack_nmf: x length");
  Matrix w(shape.d1, shape.r);
  Matrix h(shape.r, shape.d2);
  const std::size_t nw = shape.d1 * shape.r;
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nw), w.data().begin());
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(nw), x.end(), h.data().begin());
  return {std::move(w), std::move(h)};
}

Vector nmf_initial_point(const NmfShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(shape.dimension());
  for (double& e : x) e = rng.uniform();
  return x;
}

double nmf_relative_residual(const Matrix& a, std::span<const double> x, std::size_t r) {
  const NmfShape shape{a.rows(), a.cols(), r};
  const auto [w, h] = unpack_nmf(x, shape);
  return frobenius_norm(subtract(a, multiply(w, h))) / frobenius_norm(a);
}

namespace {

Vector nnls_or_best(const Matrix& a, std::span<const double> b, NmfEvents* events) {
  try {
    return nnls(a, b);
  } catch (const NnlsNotConverged& e) {
    if (events) ++events->nnls_fallbacks;
    return e.best_iterate();
  }
}

}  // namespace

FixedPointMap nmf_annls_map(const Matrix& a, std::size_t r, std::shared_ptr<NmfEvents> events) {
  if (r < 1 || r > std::min(a.rows(), a.cols())) throw InvalidArgument("nmf_annls_map: need 1 <= r <= min(d1, d2)");
  for (double v : a.data())
    if (!(v >= 0.0)) throw InvalidArgument("nmf_annls_map: A must be elementwise nonnegative");
  const NmfShape shape{a.rows(), a.cols(), r};
  auto at = std::make_shared<const Matrix>(a.transpose());
  auto am = std::make_shared<const Matrix>(a);

  FixedPointMap map;
  map.dimension = shape.dimension();
  map.eval_g = [shape, am, at, events](std::span<const double> x) {
    auto [w, h] = unpack_nmf(x, shape);
    for (std::size_t k = 0; k < shape.r; ++k) {
      auto col = w.col(k);
      double nrm = norm2(col);
      if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        Rng rng(0x6e6d66ULL + k);
        for (double& e : col) e = 0.1 + 0.9 * rng.uniform();
        nrm = norm2(col);
        if (events) ++events->reseeded_columns;
        for (std::size_t j = 0; j < shape.d2; ++j) h(k, j) = 0.0;
      } else {
        for (std::size_t j = 0; j < shape.d2; ++j) h(k, j) *= nrm;
      }
      for (double& e : col) e /= nrm;
    }
    for (std::size_t j = 0; j < shape.d2; ++j) {
      const Vector hj = nnls_or_best(w, am->col(j), events.get());
      for (std::size_t k = 0; k < shape.r; ++k) h(k, j) = hj[k];
    }
    const Matrix ht = h.transpose();
    for (std::size_t i = 0; i < shape.d1; ++i) {
      const Vector wi = nnls_or_best(ht, at->col(i), events.get());
      for (std::size_t k = 0; k < shape.r; ++k) w(i, k) = wi[k];
    }
    return pack_nmf(w, h);
  };
  map.post_mix = [](std::span<double> x) {
    for (double& e : x) e = std::max(0.0, e);
  };
  map.metric = [am, r](std::span<const double> x) { return nmf_relative_residual(*am, x, r); };
  return map;
}

}  // namespace aap
