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
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "aap/error.hpp"
#include "aap/ingest.hpp"

namespace aap {

namespace {

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(out);
}

bool parse_index(const std::string& s, std::size_t& out) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) return false;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno == ERANGE || end != s.c_str() + s.size()) return false;
  out = static_cast<std::size_t>(v);
  return true;
}

}  // namespace

LogisticDataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  LogisticDataset data;
  std::size_t max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;

    double label = 0.0;
    if (!parse_double(tok, label)) throw ParseError(lineno, "malformed label '" + tok + "'");
    SparseRow row;
    std::size_t prev = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "expected <index>:<value>, got '" + tok + "'");
      std::size_t idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx == 0)
        throw ParseError(lineno, "bad feature index in '" + tok + "'");
      if (!parse_double(tok.substr(colon + 1), val)) throw ParseError(lineno, "bad feature value in '" + tok + "'");
      if (idx <= prev) throw ParseError(lineno, "feature indices must be strictly increasing");
      prev = idx;
      row.index.push_back(idx - 1);
      row.value.push_back(val);
    }
    max_index = std::max(max_index, prev);
    int y = 0;
    if (options.binary_positive) {
      y = label == *options.binary_positive ? 1 : -1;
    } else {
      y = label > 0.0 ? 1 : -1;
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(y);
  }
  if (in.bad()) throw IoError("parse_libsvm: read failure");
  if (data.rows.empty()) throw ParseError(lineno, "no data rows");
  if (options.n_features != 0 && options.n_features < max_index)
    throw ParseError(lineno, "feature index " + std::to_string(max_index) + " exceeds the requested dimension");
  data.n_features = options.n_features != 0 ? options.n_features : max_index;
  return data;
}

LogisticDataset load_libsvm(const std::string& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_libsvm(in, options);
}

void write_libsvm(const LogisticDataset& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    const SparseRow& row = data.rows[i];
    for (std::size_t k = 0; k < row.index.size(); ++k) out << ' ' << row.index[k] + 1 << ':' << format_real(row.value[k]);
    out << '\n';
  }
}

LogisticDataset subsample_rows(const LogisticDataset& data, std::size_t n, std::uint64_t seed) {
  if (n >= data.size()) return data;
  if (n == 0) throw InvalidArgument("subsample_rows: n must be positive");
  Rng rng(seed);
  std::vector<std::size_t> keep(n);
  for (std::size_t i = 0; i < n; ++i) keep[i] = i;
  for (std::size_t i = n; i < data.size(); ++i) {
    const std::uint64_t j = rng.below(i + 1);
    if (j < n) keep[j] = i;
  }
  std::sort(keep.begin(), keep.end());
  LogisticDataset out;
  out.n_features = data.n_features;
  for (std::size_t i : keep) {
    out.rows.push_back(data.rows[i]);
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  Matrix q(n, n);
  for (double& e : q.data()) e = rng.normal();
  for (std::size_t j = 0; j < n; ++j) {
    auto qj = q.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) axpy(-dot(q.col(i), qj), q.col(i), qj);
    }
    const double nrm = norm2(qj);
    for (double& e : qj) e /= nrm;
  }
  return q;
}

AffineProblem generate_gaussian_affine(std::size_t d, double target_norm, std::uint64_t seed) {
  if (d == 0) throw InvalidArgument("generate_gaussian_affine: d must be positive");
  if (!(target_norm >= 0.0)) throw InvalidArgument("generate_gaussian_affine: target_norm must be nonnegative");
  Rng rng(seed);
  const Matrix q1 = random_orthogonal(d, rng);
  Vector u(d);
  for (double& e : u) e = rng.uniform(0.1, 1.0);
  const Matrix q2 = random_orthogonal(d, rng);
  const double umax = *std::max_element(u.begin(), u.end());
  Matrix scaled_q1 = q1;
  for (std::size_t j = 0; j < d; ++j)
    for (double& e : scaled_q1.col(j)) e *= target_norm * u[j] / umax;
  AffineProblem out{multiply(scaled_q1, q2), Vector(d)};
  for (double& e : out.b) e = rng.normal();
  return out;
}

}  // namespace aap
