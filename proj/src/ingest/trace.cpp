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


#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "aap/error.hpp"
#include "aap/ingest.hpp"

namespace aap {

namespace {

constexpr std::array<const char*, 9> kBaseColumns = {"solver", "m", "run", "t", "picard_substep", "g_evals",
                                                     "residual_norm", "theta", "metric"};

std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_real(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line, "bad real '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return parse_real(s, line);
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  const double v = parse_real(s, line);
  if (v < 0.0 || v != std::floor(v)) throw ParseError(line, "bad count '" + s + "'");
  return static_cast<std::size_t>(v);
}

nlohmann::json real_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

nlohmann::json optional_to_json(const std::optional<double>& v) { return v ? real_to_json(*v) : nlohmann::json(); }

std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
  return j.get<double>();
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TraceDiagnostics to_trace_diagnostics(const DiagnosticsRecord& rec) {
  return {rec.jac_gmres_gain,     rec.et_norm,      rec.et_bound,       rec.et_degenerate ? 1.0 : 0.0,
          rec.cond_s,             rec.cond_y,       rec.cond_g,         rec.s_minus_g_norm,
          rec.y_minus_jg_norm,    rec.sigma_min_y_over_f, rec.forcing_term, rec.spd_gain_upper,
          rec.vandermonde_upper,  rec.b_inv_norm};
}

bool TraceRow::has_diagnostics() const {
  for (const auto& v : diagnostics)
    if (v) return true;
  return false;
}

std::vector<std::string> trace_columns(bool with_diagnostics) {
  std::vector<std::string> cols(kBaseColumns.begin(), kBaseColumns.end());
  if (with_diagnostics) cols.insert(cols.end(), kTraceDiagnosticColumns.begin(), kTraceDiagnosticColumns.end());
  return cols;
}

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out) {
  bool with_diag = false;
  for (const auto& r : rows) with_diag = with_diag || r.has_diagnostics();
  const auto cols = trace_columns(with_diag);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    if (r.solver.find_first_of(",\n\"") != std::string::npos)
      throw InvalidArgument("write_trace_csv: solver label must not contain commas, quotes or newlines");
    out << r.solver << ',' << r.m << ',' << r.run << ',' << r.t << ',' << r.picard_substep << ',' << r.g_evals << ','
        << format_real(r.residual_norm) << ',' << format_optional(r.theta) << ',' << format_optional(r.metric);
    if (with_diag)
      for (const auto& v : r.diagnostics) out << ',' << format_optional(v);
    out << '\n';
  }
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_trace_csv(rows, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split_csv(line);
  const bool with_diag = header == trace_columns(true);
  if (!with_diag && header != trace_columns(false)) throw ParseError(1, "unexpected trace header");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw ParseError(lineno, "wrong number of fields");
    TraceRow r;
    r.solver = f[0];
    r.m = parse_count(f[1], lineno);
    r.run = parse_count(f[2], lineno);
    r.t = parse_count(f[3], lineno);
    r.picard_substep = static_cast<int>(parse_real(f[4], lineno));
    r.g_evals = parse_count(f[5], lineno);
    r.residual_norm = parse_real(f[6], lineno);
    r.theta = parse_optional(f[7], lineno);
    r.metric = parse_optional(f[8], lineno);
    if (with_diag)
      for (std::size_t k = 0; k < r.diagnostics.size(); ++k) r.diagnostics[k] = parse_optional(f[9 + k], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trace_csv(in);
}

std::string trace_to_json(const std::vector<TraceRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    o["solver"] = r.solver;
    o["m"] = r.m;
    o["run"] = r.run;
    o["t"] = r.t;
    o["picard_substep"] = r.picard_substep;
    o["g_evals"] = r.g_evals;
    o["residual_norm"] = real_to_json(r.residual_norm);
    o["theta"] = optional_to_json(r.theta);
    o["metric"] = optional_to_json(r.metric);
    if (r.has_diagnostics())
      for (std::size_t k = 0; k < r.diagnostics.size(); ++k)
        o[kTraceDiagnosticColumns[k]] = optional_to_json(r.diagnostics[k]);
    arr.push_back(std::move(o));
  }
  return arr.dump(1) + "\n";
}

std::vector<TraceRow> trace_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.what());
  }
  if (!arr.is_array()) throw ParseError(0, "trace JSON must be an array");
  std::vector<TraceRow> rows;
  try {
    for (const auto& o : arr) {
      TraceRow r;
      r.solver = o.at("solver").get<std::string>();
      r.m = o.at("m").get<std::size_t>();
      r.run = o.at("run").get<std::size_t>();
      r.t = o.at("t").get<std::size_t>();
      r.picard_substep = o.at("picard_substep").get<int>();
      r.g_evals = o.at("g_evals").get<std::size_t>();
      r.residual_norm = *optional_from_json(o.at("residual_norm"));
      r.theta = optional_from_json(o.at("theta"));
      r.metric = optional_from_json(o.at("metric"));
      for (std::size_t k = 0; k < r.diagnostics.size(); ++k) {
        auto it = o.find(kTraceDiagnosticColumns[k]);
        if (it != o.end()) r.diagnostics[k] = optional_from_json(*it);
      }
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, e.what());
  }
  return rows;
}

void write_trace_json(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << trace_to_json(rows);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<TraceRow> read_trace_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_json(ss.str());
}

}  // namespace aap
