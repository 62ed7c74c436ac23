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
 * @file ingest.hpp
 * LIBSVM input, seeded synthetic generators and trace persistence.
 *
 * Trace CSV: one header line, LF line endings, reals printed with 17
 * significant digits, empty fields for missing values.
 */

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aap/diagnostics.hpp"
#include "aap/linalg.hpp"
#include "aap/problems.hpp"
#include "aap/rng.hpp"

namespace aap {

struct LibsvmOptions {
  /// When set, rows whose label equals this value become +1 and all others -1.
  std::optional<double> binary_positive;
  /// Feature count; 0 means the largest index seen.
  std::size_t n_features = 0;
};

/// Grammar per nonempty line: <label> <idx>:<val> ..., idx 1-based and strictly increasing.
LogisticDataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
LogisticDataset load_libsvm(const std::string& path, const LibsvmOptions& options = {});
void write_libsvm(const LogisticDataset& data, std::ostream& out);

/// Reservoir sample of n rows (original order kept); returns the input when n >= size.
LogisticDataset subsample_rows(const LogisticDataset& data, std::size_t n, std::uint64_t seed);

/// Haar-like random orthogonal matrix: Gram-Schmidt (two passes) on a Gaussian matrix.
Matrix random_orthogonal(std::size_t n, Rng& rng);

struct AffineProblem {
  Matrix a;
  Vector b;
};
/// A = target_norm Q1 diag(u / max u) Q2 with u uniform on [0.1, 1]; b standard normal.
AffineProblem generate_gaussian_affine(std::size_t d, double target_norm, std::uint64_t seed);

inline constexpr std::array<const char*, 14> kTraceDiagnosticColumns = {
    "jac_gmres_gain", "et_norm",        "et_bound",       "et_degenerate",      "cond_s",
    "cond_y",         "cond_g",         "s_minus_g_norm", "y_minus_jg_norm",    "sigma_min_y_over_f",
    "forcing_term",   "spd_gain_upper", "vandermonde_upper", "b_inv_norm"};
using TraceDiagnostics = std::array<std::optional<double>, kTraceDiagnosticColumns.size()>;
TraceDiagnostics to_trace_diagnostics(const DiagnosticsRecord& rec);

struct TraceRow {
  std::string solver;
  std::size_t m = 0;
  std::size_t run = 0;
  std::size_t t = 0;
  int picard_substep = -1;
  std::size_t g_evals = 0;
  double residual_norm = 0.0;
  std::optional<double> theta;
  std::optional<double> metric;
  TraceDiagnostics diagnostics{};

  bool has_diagnostics() const;
  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Column names in file order; diagnostics columns are appended when requested.
std::vector<std::string> trace_columns(bool with_diagnostics);

/// Diagnostics columns are written when any row carries at least one diagnostic value.
void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out);
void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path);
std::vector<TraceRow> read_trace_csv(std::istream& in);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// JSON array of objects with the same fields; null marks a missing value and
/// non-finite reals are written as the strings "inf", "-inf" and "nan".
void write_trace_json(const std::vector<TraceRow>& rows, const std::string& path);
std::vector<TraceRow> read_trace_json(const std::string& path);
std::string trace_to_json(const std::vector<TraceRow>& rows);
std::vector<TraceRow> trace_from_json(const std::string& text);

/// Renders a real with 17 significant digits ("inf", "-inf", "nan" for non-finite values).
std::string format_real(double v);

}  // namespace aap
