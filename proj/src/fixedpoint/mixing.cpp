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

#include "aap/error.hpp"
#include "aap/fixedpoint.hpp"

namespace aap {

MapValue evaluate(const FixedPointMap& map, std::span<const double> x) {
  MapValue v;
  if (map.eval_f) {
    v.f = map.eval_f(x);
    if (v.f.size() != x.size()) throw DimensionMismatch("evaluate: residual has the wrong length");
    v.g = add(x, v.f);
  } else {
    if (!map.eval_g) throw InvalidArgument("evaluate: map has neither eval_g nor eval_f");
    v.g = map.eval_g(x);
    if (v.g.size() != x.size()) throw DimensionMismatch("evaluate: g(x) has the wrong length");
    v.f = sub(v.g, x);
  }
  return v;
}

SecantHistory make_history(std::vector<Vector> points, const std::vector<Vector>& residuals, Reference reference) {
  if (points.empty() || points.size() != residuals.size())
    throw DimensionMismatch("make_history: need matching, nonempty point and residual lists");
  const std::size_t d = points.front().size();
  const std::size_t w = points.size() - 1;
  SecantHistory h;
  h.reference = reference;
  h.residuals = Matrix::from_columns(residuals);
  if (h.residuals.rows() != d) throw DimensionMismatch("make_history: residual length differs from point length");
  h.s = Matrix(d, w);
  h.y = Matrix(d, w);
  for (std::size_t l = 0; l < w; ++l) {
    if (reference == Reference::Oldest) {
      h.s.set_col(l, residuals[l]);
    } else {
      h.s.set_col(l, sub(points[l + 1], points[l]));
    }
    h.y.set_col(l, sub(residuals[l + 1], residuals[l]));
  }
  h.points = std::move(points);
  return h;
}

MixingSolution solve_mixing(const SecantHistory& history, double rank_tol) {
  const std::size_t w = history.window();
  const std::size_t ref = history.ref_index();
  auto f = history.f_ref();
  MixingSolution out;
  out.alpha.assign(w + 1, 0.0);
  out.z.assign(w, 0.0);

  const double fnorm = norm2(f);
  if (fnorm == 0.0 || w == 0) {
    out.alpha[ref] = 1.0;
    out.theta = fnorm == 0.0 ? 0.0 : 1.0;
    for (std::size_t l = 0; l < w; ++l) out.dropped.push_back(l);
    return out;
  }

  LsSolution ls = qr_least_squares(history.y, f, rank_tol);
  out.z = std::move(ls.solution);
  out.rank = ls.effective_rank;
  out.dropped = std::move(ls.dropped_columns);
  out.theta = ls.residual_norm / fnorm;

  const Vector& z = out.z;
  if (history.reference == Reference::Oldest) {
    out.alpha[0] = 1.0 + z[0];
    for (std::size_t l = 1; l < w; ++l) out.alpha[l] = z[l] - z[l - 1];
    out.alpha[w] = -z[w - 1];
  } else {
    out.alpha[0] = z[0];
    for (std::size_t l = 1; l < w; ++l) out.alpha[l] = z[l] - z[l - 1];
    out.alpha[w] = 1.0 - z[w - 1];
  }
  return out;
}

MixedPoint mix_points(const SecantHistory& history, std::span<const double> alpha, double beta) {
  if (alpha.size() != history.points.size()) throw DimensionMismatch("mix_points: alpha length");
  const std::size_t ref = history.ref_index();
  const Vector& xr = history.points[ref];
  MixedPoint out{xr, Vector(xr.size(), 0.0)};
  Vector fmix(xr.size(), 0.0);
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    if (alpha[l] == 0.0) continue;
    if (l != ref) axpy(alpha[l], sub(history.points[l], xr), out.mixed);
    axpy(alpha[l], history.residuals.col(l), fmix);
  }
  out.next = out.mixed;
  axpy(beta, fmix, out.next);
  return out;
}

MixedPoint mix_points(const SecantHistory& history, const MixingSolution& mixing, double beta) {
  if (history.reference != Reference::Oldest) return mix_points(history, mixing.alpha, beta);
  if (mixing.z.size() != history.window()) throw DimensionMismatch("mix_points: z length");
  // x_t - S z and sum alpha^l f^l = f_t - Y z
  MixedPoint out{history.x_ref(), {}};
  axpy(-1.0, multiply(history.s, mixing.z), out.mixed);
  Vector r_hat = multiply(history.y, mixing.z);
  axpy(-1.0, history.f_ref(), r_hat);
  out.next = out.mixed;
  axpy(-beta, r_hat, out.next);
  return out;
}

MultisecantDirection multisecant_direction(const SecantHistory& history, double rank_tol) {
  MultisecantDirection out;
  auto f = history.f_ref();
  if (history.window() == 0 || norm2(f) == 0.0) {
    out.z.assign(history.window(), 0.0);
  } else {
    out.z = qr_least_squares(history.y, f, rank_tol).solution;
  }
  out.p_hat = multiply(history.s, out.z);
  out.r_hat = multiply(history.y, out.z);
  axpy(-1.0, f, out.r_hat);
  return out;
}

ApplyHResult apply_H(const SecantHistory& history, double beta, std::span<const double> v, double rank_tol) {
  if (v.size() != history.s.rows()) throw DimensionMismatch("apply_H: vector length");
  ApplyHResult out;
  out.value = scaled(-beta, v);
  if (history.window() == 0) {
    out.rank_deficient = true;
    return out;
  }
  const LsSolution ls = qr_least_squares(history.y, v, rank_tol);
  out.rank_deficient = ls.effective_rank < history.window();
  axpy(1.0, multiply(history.s, ls.solution), out.value);
  axpy(beta, multiply(history.y, ls.solution), out.value);
  return out;
}

}  // namespace aap
