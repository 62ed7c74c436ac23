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


/**
 * @file problems.hpp
 * Concrete fixed-point maps: gradient descent on regularised logistic
 * regression, ANNLS for nonnegative matrix factorisation, affine maps and a
 * smooth quadratic map whose Jacobian Lipschitz constant is known exactly.
 */

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "aap/fixedpoint.hpp"
#include "aap/linalg.hpp"

namespace aap {

struct SparseRow {
  std::vector<std::size_t> index;  // 0-based, strictly increasing
  Vector value;
};

struct LogisticDataset {
  std::size_t n_features = 0;
  std::vector<SparseRow> rows;
  std::vector<int> labels;  // each -1 or +1

  std::size_t size() const noexcept { return rows.size(); }
  /// Throws InvalidArgument when labels or indices are out of range.
  void validate() const;
};

/// n unit-norm rows of Gaussian features whose scales decay geometrically from 1 to 0.01;
/// labels from a random separating direction plus noise.
LogisticDataset make_synthetic_logistic(std::size_t n, std::size_t d, std::uint64_t seed);

/// h(x) = (1/n) sum log(1 + exp(-y_i x.v_i)) + (mu/2) ||x||^2.
double logistic_loss(const LogisticDataset& data, double mu, std::span<const double> x);
Vector logistic_gradient(const LogisticDataset& data, double mu, std::span<const double> x);
Vector logistic_hessian_vector(const LogisticDataset& data, double mu, std::span<const double> x,
                               std::span<const double> v);
/// Largest Hessian eigenvalue at x by power iteration.
double logistic_smoothness(const LogisticDataset& data, double mu, std::span<const double> x);

/**
 * g(x) = x - eta grad h(x). kappa = max(|1 - eta mu|, |1 - eta L|) with L the
 * power-iteration estimate at x = 0, where the logistic curvature is largest.
 */
FixedPointMap logistic_gd_map(LogisticDataset data, double mu, double eta);

/// g(x) = A x + b with kappa = ||A|| and gamma = 0.
FixedPointMap affine_map(const Matrix& a, const Vector& b);

/// M = 0.2 I + tridiag(-1, 2, -1), the coupling of the quadratic map.
Matrix quadratic_coupling(std::size_t d);
/// Spectrum bounds of quadratic_coupling(d).
std::pair<double, double> quadratic_coupling_extremes(std::size_t d);
/// c such that x_star is a fixed point: c = x_star .* x_star + M x_star.
Vector quadratic_rhs(std::span<const double> x_star);
/// g(x) = x - scale (x .* x + M x - c), gamma = 2 scale.
FixedPointMap quadratic_map(const Vector& c, double scale);
/// Bound on ||g'(x)|| over the box lo <= x_i <= hi.
double quadratic_kappa_on_box(std::size_t d, double scale, double lo, double hi);

/// A = W H with W (d1 x r) and H (r x d2) uniform on [0, 1).
Matrix make_synthetic_nmf(std::size_t d1, std::size_t d2, std::size_t r, std::uint64_t seed);

struct NmfShape {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t r = 0;
  std::size_t dimension() const noexcept { return (d1 + d2) * r; }
};

/// x = [vec(W), vec(H)], both column-major.
Vector pack_nmf(const Matrix& w, const Matrix& h);
std::pair<Matrix, Matrix> unpack_nmf(std::span<const double> x, const NmfShape& shape);
/// W0 and H0 uniform on [0, 1).
Vector nmf_initial_point(const NmfShape& shape, std::uint64_t seed);
double nmf_relative_residual(const Matrix& a, std::span<const double> x, std::size_t r);

/// Counters updated by the ANNLS map; safe to share between threads.
struct NmfEvents {
  std::atomic<std::size_t> reseeded_columns{0};
  std::atomic<std::size_t> nnls_fallbacks{0};
};

/**
 * One ANNLS sweep: normalise W columns to unit norm (rescaling H rows), then
 * H by columnwise NNLS, then W by rowwise NNLS. Mixed iterates are clipped at
 * zero through post_mix. The metric is ||A - W H||_F / ||A||_F.
 */
FixedPointMap nmf_annls_map(const Matrix& a, std::size_t r, std::shared_ptr<NmfEvents> events = nullptr);

}  // namespace aap
