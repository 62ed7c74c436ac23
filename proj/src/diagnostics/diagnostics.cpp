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


#include "aap/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aap/error.hpp"
#include "aap/rng.hpp"

namespace aap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector random_normal(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& e : v) e = rng.normal();
  return v;
}

double mean_column_norm(const Matrix& a) {
  if (a.cols() == 0) return 1.0;
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) s += norm2(a.col(j));
  s /= static_cast<double>(a.cols());
  return s > 0.0 ? s : 1.0;
}

}  // namespace

Vector JacobianAccess::apply(std::span<const double> x, std::span<const double> v) const {
  if (mode == JacobianMode::ExplicitDense && dense) return multiply(dense(x), v);
  if (!jvp) throw InvalidArgument("JacobianAccess: no Jacobian-vector product available");
  return jvp(x, v);
}

Matrix JacobianAccess::matrix(std::span<const double> x, std::size_t d) const {
  if (dense) return dense(x);
  Matrix j(d, d);
  Vector e(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    e[k] = 1.0;
    j.set_col(k, apply(x, e));
    e[k] = 0.0;
  }
  return j;
}

JacobianAccess JacobianAccess::analytic(JvpFunction jvp) {
  JacobianAccess a;
  a.mode = JacobianMode::Analytic;
  a.jvp = std::move(jvp);
  return a;
}

JacobianAccess JacobianAccess::finite_difference(const FixedPointMap& map, double step) {
  JacobianAccess a;
  a.mode = JacobianMode::FiniteDifference;
  a.jvp = [map, step](std::span<const double> x, std::span<const double> v) {
    return finite_difference_jvp(map, x, v, step);
  };
  return a;
}

JacobianAccess JacobianAccess::explicit_dense(std::function<Matrix(std::span<const double>)> jac) {
  JacobianAccess a;
  a.mode = JacobianMode::ExplicitDense;
  a.dense = std::move(jac);
  return a;
}

JacobianAccess JacobianAccess::from_map(const FixedPointMap& map, double step) {
  return map.jvp_f ? analytic(map.jvp_f) : finite_difference(map, step);
}

bool linearity_spot_check(const JacobianAccess& jac, std::span<const double> x, double scale, std::uint64_t seed,
                          double tol, int probes) {
  Rng rng(seed);
  for (int p = 0; p < probes; ++p) {
    const Vector u = random_normal(rng, x.size());
    const Vector v = random_normal(rng, x.size());
    Vector lhs = jac.apply(x, add(u, v));
    axpy(-1.0, jac.apply(x, u), lhs);
    axpy(-1.0, jac.apply(x, v), lhs);
    if (norm2(lhs) > tol * (norm2(u) + norm2(v)) * scale) return false;
  }
  return true;
}

double optimization_gain(const SecantHistory& history) {
  auto f = history.f_ref();
  const double fn = norm2(f);
  if (fn == 0.0) return 0.0;
  if (history.window() == 0) return 1.0;
  return qr_least_squares(history.y, f).residual_norm / fn;
}

MultisecantError multisecant_error(const SecantHistory& history, const JacobianAccess& jac,
                                   std::span<const double> x_t, double rank_tol) {
  const Matrix& s = history.s;
  const std::size_t m = s.cols();
  MultisecantError out;
  if (m == 0) {
    out.degenerate = true;
    return out;
  }
  const SvdResult sv = svd(s);
  const double cutoff = rank_tol * sv.sigma.front();
  std::size_t k = 0;
  while (k < m && sv.sigma[k] > 0.0 && sv.sigma[k] > cutoff) ++k;
  out.rank = k;
  out.degenerate = k < m;
  if (k == 0) return out;

  Matrix resid(s.rows(), m);
  for (std::size_t j = 0; j < m; ++j) {
    Vector c = jac.apply(x_t, s.col(j));
    axpy(-1.0, history.y.col(j), c);
    resid.set_col(j, c);
  }
  // (J S - Y) S^+ = (J S - Y) V_k Sigma_k^-1 U_k^T and U_k has orthonormal columns
  Matrix reduced(s.rows(), k);
  for (std::size_t c = 0; c < k; ++c) {
    Vector col = multiply(resid, sv.v.col(c));
    for (double& e : col) e /= sv.sigma[c];
    reduced.set_col(c, col);
  }
  out.norm = spectral_norm(reduced);
  return out;
}

double et_upper_bound(const SecantHistory& history, double gamma, double f_norm) {
  if (gamma == 0.0 || f_norm == 0.0) return 0.0;
  const double m = static_cast<double>(history.window());
  return gamma * std::pow(m, 1.5) * condition_number(history.s) * f_norm;
}

Matrix krylov_matrix_G(const LinearOperator& jvp_g, std::span<const double> f_t, std::size_t m) {
  if (m < 1) throw InvalidArgument("krylov_matrix_G: m must be >= 1");
  Matrix g(f_t.size(), m);
  Vector col(f_t.begin(), f_t.end());
  for (std::size_t l = 0; l < m; ++l) {
    g.set_col(l, col);
    if (l + 1 < m) col = jvp_g(col);
  }
  return g;
}

SgDistance s_g_distance(const SecantHistory& history, const Matrix& g, const JacobianAccess& jac,
                        std::span<const double> x_t) {
  if (g.rows() != history.s.rows() || g.cols() != history.s.cols())
    throw DimensionMismatch("s_g_distance: G must match the shape of S");
  Matrix jg(g.rows(), g.cols());
  for (std::size_t j = 0; j < g.cols(); ++j) jg.set_col(j, jac.apply(x_t, g.col(j)));
  return {spectral_norm(subtract(history.s, g)), spectral_norm(subtract(history.y, jg))};
}

double jacobian_gmres_gain(const JacobianAccess& jac, std::span<const double> x_t, std::span<const double> f_t,
                           std::size_t m) {
  const double fn = norm2(f_t);
  if (fn == 0.0) return 0.0;
  const LinearOperator op = [&](std::span<const double> v) { return jac.apply(x_t, v); };
  return arnoldi_gmres(op, f_t, m).residual_norm / fn;
}

double spd_gain_upper(double cond_j, std::size_t m) {
  if (!(cond_j >= 1.0)) throw InvalidArgument("spd_gain_upper: condition number must be >= 1");
  if (std::isinf(cond_j)) return 2.0;
  const double r = std::sqrt(cond_j);
  return 2.0 * std::pow((r - 1.0) / (r + 1.0), static_cast<double>(m));
}

VandermondeBound vandermonde_cond_bound(std::span<const double> eigs, std::span<const double> coeffs, std::size_t m) {
  if (eigs.size() != coeffs.size()) throw DimensionMismatch("vandermonde_cond_bound: eigs and coeffs differ in length");
  if (m < 1 || eigs.empty()) throw InvalidArgument("vandermonde_cond_bound: need m >= 1 and at least one eigenvalue");
  const std::size_t d = eigs.size();
  VandermondeBound out;
  double amin = kInf;
  for (double a : coeffs) amin = std::min(amin, std::fabs(a));

  Matrix v(d, m);
  for (std::size_t i = 0; i < d; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      v(i, j) = p;
      p *= eigs[i];
    }
  }
  const Vector sv = singular_values(v);
  out.sigma_min = m > d ? 0.0 : sv.back();
  const double floor = static_cast<double>(d) * std::numeric_limits<double>::epsilon() * sv.front();
  if (out.sigma_min <= floor || amin == 0.0) {
    out.degenerate = true;
    out.value = kInf;
    return out;
  }
  out.value = std::sqrt(static_cast<double>(m)) / (amin * out.sigma_min);
  return out;
}

double one_step_bound(double theta, double beta, double kappa, double gamma, double b_inv_norm, double c_e,
                      double f_norm) {
  const double root = std::sqrt(std::max(0.0, 1.0 - theta * theta));
  const double first = ((1.0 - beta) + beta * kappa) * theta * f_norm;
  const double second = root * b_inv_norm * (0.5 * gamma * root * b_inv_norm + c_e) * f_norm * f_norm;
  return first + second;
}

double completion_inverse_norm(const SecantHistory& history, std::uint64_t seed, int draws) {
  const std::size_t d = history.s.rows();
  const std::size_t m = history.window();
  if (m > d) throw InvalidArgument("completion_inverse_norm: window exceeds dimension");
  const double ss = mean_column_norm(history.s);
  const double sy = mean_column_norm(history.y);
  Rng rng(seed);
  double best = kInf;
  const int n_draws = m == d ? 1 : std::max(1, draws);
  for (int k = 0; k < n_draws; ++k) {
    Matrix sbar(d, d);
    Matrix ybar(d, d);
    for (std::size_t j = 0; j < m; ++j) {
      sbar.set_col(j, history.s.col(j));
      ybar.set_col(j, history.y.col(j));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t j = m; j < d; ++j) {
      sbar.set_col(j, scaled(ss * scale, random_normal(rng, d)));
      ybar.set_col(j, scaled(sy * scale, random_normal(rng, d)));
    }
    try {
      best = std::min(best, spectral_norm(multiply(sbar, inverse(ybar))));
    } catch (const NumericalError&) {
      // singular draw; try the next one
    }
  }
  return best;
}

DiagnosticsRecord compute_diagnostics(const MixStep& step, const FixedPointMap& map, const JacobianAccess& jac,
                                      const DiagnosticsOptions& options) {
  if (step.history == nullptr || step.mixing == nullptr) throw InvalidArgument("compute_diagnostics: incomplete step");
  const SecantHistory& h = *step.history;
  const std::size_t m = h.window();
  const std::size_t d = h.s.rows();
  const Vector& x_t = h.points.front();
  auto f = h.residuals.col(0);

  DiagnosticsRecord rec;
  rec.t = step.t;
  rec.f_norm = norm2(f);
  rec.theta = step.mixing->theta;
  if (rec.f_norm == 0.0 || m == 0) return rec;

  const LinearOperator jvp_g = [&](std::span<const double> v) {
    Vector out = jac.apply(x_t, v);
    axpy(1.0, v, out);
    return out;
  };
  const Matrix g = krylov_matrix_G(jvp_g, f, m);
  rec.cond_s = condition_number(h.s);
  rec.cond_y = condition_number(h.y);
  rec.cond_g = condition_number(g);

  const MultisecantError et = multisecant_error(h, jac, x_t, options.rank_tol);
  rec.et_norm = et.norm;
  rec.et_degenerate = et.degenerate;
  if (map.gamma) rec.et_bound = et_upper_bound(h, *map.gamma, rec.f_norm);

  const SgDistance sg = s_g_distance(h, g, jac, x_t);
  rec.s_minus_g_norm = sg.s_minus_g;
  rec.y_minus_jg_norm = sg.y_minus_jg;

  rec.jac_gmres_gain = jacobian_gmres_gain(jac, x_t, f, m);
  rec.sigma_min_y_over_f = singular_values(h.y).back() / rec.f_norm;

  Vector jp = jac.apply(x_t, multiply(h.s, step.mixing->z));
  axpy(-1.0, f, jp);
  rec.forcing_term = norm2(jp) / rec.f_norm;

  if (options.spd_bound || options.vandermonde) {
    Matrix jd = jac.matrix(x_t, d);
    Matrix sym(d, d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) sym(i, j) = 0.5 * (jd(i, j) + jd(j, i));
    if (options.spd_bound) {
      const SymmetricEigen e = symmetric_eigen(sym);
      double lo = kInf;
      double hi = 0.0;
      for (double l : e.values) {
        lo = std::min(lo, std::fabs(l));
        hi = std::max(hi, std::fabs(l));
      }
      const double cond = lo == 0.0 ? kInf : hi / lo;
      rec.spd_gain_upper = spd_gain_upper(std::max(1.0, cond), m);
    }
    if (options.vandermonde) {
      for (std::size_t i = 0; i < d; ++i) sym(i, i) += 1.0;
      const SymmetricEigen e = symmetric_eigen(sym);
      Vector a = multiply_transpose(e.vectors, f);
      for (double& v : a) v /= rec.f_norm;
      rec.vandermonde_upper = vandermonde_cond_bound(e.values, a, m).value;
    }
  }

  if (d <= options.completion_max_dim) rec.b_inv_norm = completion_inverse_norm(h, options.completion_seed + step.t);
  return rec;
}

InstrumentedRun run_aap_instrumented(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                                     const DiagnosticsOptions& options) {
  InstrumentedRun out;
  const JacobianAccess jac = JacobianAccess::from_map(map, options.fd_step);
  out.report = run_aap(map, x0, cfg, [&](const MixStep& step) {
    out.diagnostics.push_back(compute_diagnostics(step, map, jac, options));
  });
  return out;
}

}  // namespace aap
