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
#include <memory>

#include "aap/error.hpp"
#include "aap/problems.hpp"
#include "aap/rng.hpp"

namespace aap {

namespace {

double sparse_dot(const SparseRow& row, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.index.size(); ++k) s += row.value[k] * x[row.index[k]];
  return s;
}

void sparse_axpy(double a, const SparseRow& row, std::span<double> y) {
  for (std::size_t k = 0; k < row.index.size(); ++k) y[row.index[k]] += a * row.value[k];
}

// sigma(z) = 1 / (1 + exp(-z)) without overflow
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_shape(const LogisticDataset& data, std::span<const double> x) {
  if (x.size() != data.n_features) throw DimensionMismatch("logistic: x length differs from the feature count");
  if (data.rows.empty()) throw InvalidArgument("logistic: empty dataset");
}

}  // namespace

void LogisticDataset::validate() const {
  if (labels.size() != rows.size()) throw InvalidArgument("LogisticDataset: one label per row required");
  for (int y : labels)
    if (y != 1 && y != -1) throw InvalidArgument("LogisticDataset: labels must be -1 or +1");
  for (const auto& row : rows) {
    if (row.index.size() != row.value.size()) throw InvalidArgument("LogisticDataset: ragged sparse row");
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      if (row.index[k] >= n_features) throw InvalidArgument("LogisticDataset: feature index out of range");
      if (k > 0 && row.index[k] <= row.index[k - 1]) throw InvalidArgument("LogisticDataset: indices not increasing");
    }
  }
}

LogisticDataset make_synthetic_logistic(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidArgument("make_synthetic_logistic: n and d must be positive");
  Rng rng(seed);
  Vector w(d);
  for (double& e : w) e = rng.normal();
  LogisticDataset data;
  data.n_features = d;
  data.rows.reserve(n);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    row.value.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      row.index.push_back(j);
      // feature scales decay from 1 to 0.01 so the Hessian spectrum is spread out
      const double scale = d > 1 ? std::pow(10.0, -2.0 * static_cast<double>(j) / static_cast<double>(d - 1)) : 1.0;
      row.value[j] = scale * rng.normal();
    }
    const double nrm = norm2(row.value);
    for (double& e : row.value) e /= nrm;
    const double margin = dot(row.value, w) + 0.5 * rng.normal();
    data.labels.push_back(margin >= 0.0 ? 1 : -1);
    data.rows.push_back(std::move(row));
  }
  return data;
}

double logistic_loss(const LogisticDataset& data, double mu, std::span<const double> x) {
  check_shape(data, x);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = data.labels[i] * sparse_dot(data.rows[i], x);
    // log(1 + exp(-z)) = log1p(exp(-|z|)) + max(0, -z)
    s += std::log1p(std::exp(-std::fabs(z))) + std::max(0.0, -z);
  }
  const double xn = norm2(x);
  return s / static_cast<double>(data.size()) + 0.5 * mu * xn * xn;
}

Vector logistic_gradient(const LogisticDataset& data, double mu, std::span<const double> x) {
  check_shape(data, x);
  Vector grad(x.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.labels[i];
    const double z = y * sparse_dot(data.rows[i], x);
    sparse_axpy(-y * sigmoid(-z) * inv_n, data.rows[i], grad);
  }
  axpy(mu, x, grad);
  return grad;
}

Vector logistic_hessian_vector(const LogisticDataset& data, double mu, std::span<const double> x,
                               std::span<const double> v) {
  check_shape(data, x);
  if (v.size() != x.size()) throw DimensionMismatch("logistic_hessian_vector: v length");
  Vector out(x.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double s = sigmoid(data.labels[i] * sparse_dot(data.rows[i], x));
    const double c = s * (1.0 - s) * sparse_dot(data.rows[i], v) * inv_n;
    if (c != 0.0) sparse_axpy(c, data.rows[i], out);
  }
  axpy(mu, v, out);
  return out;
}

double logistic_smoothness(const LogisticDataset& data, double mu, std::span<const double> x) {
  check_shape(data, x);
  const std::size_t d = x.size();
  Vector v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector hv = logistic_hessian_vector(data, mu, x, v);
    const double next = norm2(hv);
    if (next == 0.0) return 0.0;
    for (double& e : hv) e /= next;
    v = std::move(hv);
    if (std::fabs(next - lambda) <= 1e-12 * next) return next;
    lambda = next;
  }
  return lambda;
}

FixedPointMap logistic_gd_map(LogisticDataset data, double mu, double eta) {
  if (!(mu > 0.0) || !(eta > 0.0)) throw InvalidArgument("logistic_gd_map: mu and eta must be positive");
  if (data.rows.empty()) throw InvalidArgument("logistic_gd_map: empty dataset");
  data.validate();
  auto shared = std::make_shared<const LogisticDataset>(std::move(data));
  const std::size_t d = shared->n_features;

  FixedPointMap map;
  map.dimension = d;
  map.eval_f = [shared, mu, eta](std::span<const double> x) { return scaled(-eta, logistic_gradient(*shared, mu, x)); };
  map.eval_g = [shared, mu, eta](std::span<const double> x) {
    Vector g(x.begin(), x.end());
    axpy(-eta, logistic_gradient(*shared, mu, x), g);
    return g;
  };
  map.jvp_f = [shared, mu, eta](std::span<const double> x, std::span<const double> v) {
    return scaled(-eta, logistic_hessian_vector(*shared, mu, x, v));
  };
  const Vector zero(d, 0.0);
  const double l = logistic_smoothness(*shared, mu, zero);
  map.kappa = std::max(std::fabs(1.0 - eta * mu), std::fabs(1.0 - eta * l));
  map.metric = [shared, mu](std::span<const double> x) { return logistic_loss(*shared, mu, x); };
  return map;
}

}  // namespace aap
