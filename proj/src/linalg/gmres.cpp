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
#include "aap/linalg.hpp"

namespace aap {

GmresResult arnoldi_gmres(const LinearOperator& matvec, std::span<const double> b, std::size_t m) {
  const std::size_t d = b.size();
  if (m < 1) throw InvalidArgument("arnoldi_gmres: m must be >= 1");
  GmresResult out;
  out.solution.assign(d, 0.0);
  const double beta0 = norm2(b);
  if (beta0 == 0.0) return out;
  m = std::min(m, d);

  std::vector<Vector> basis;
  basis.reserve(m + 1);
  basis.emplace_back(scaled(1.0 / beta0, b));
  // Hessenberg columns after Givens rotation, i.e. the R factor
  std::vector<Vector> r;
  Vector cs, sn;
  Vector g{beta0};
  const double breakdown_tol = 1e-14 * beta0;

  std::size_t k = 0;
  for (; k < m; ++k) {
    Vector w = matvec(basis[k]);
    if (w.size() != d) throw DimensionMismatch("arnoldi_gmres: operator changed the length");
    if (!all_finite(w)) throw NumericalError("arnoldi_gmres: non-finite matvec");
    Vector h(k + 2, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= k; ++i) {
        const double c = dot(basis[i], w);
        h[i] += c;
        axpy(-c, basis[i], w);
      }
    }
    h[k + 1] = norm2(w);

    for (std::size_t i = 0; i < k; ++i) {
      const double t = cs[i] * h[i] + sn[i] * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    const double hk1 = h[k + 1];
    const double rho = std::hypot(h[k], hk1);
    const double c = rho == 0.0 ? 1.0 : h[k] / rho;
    const double s = rho == 0.0 ? 0.0 : hk1 / rho;
    cs.push_back(c);
    sn.push_back(s);
    h[k] = rho;
    h[k + 1] = 0.0;
    g.push_back(-s * g[k]);
    g[k] *= c;
    h.pop_back();
    r.push_back(std::move(h));

    if (hk1 <= breakdown_tol) {
      out.breakdown = true;
      ++k;
      break;
    }
    basis.emplace_back(scaled(1.0 / hk1, w));
  }
  out.iterations = k;

  // back substitution on the k x k triangle; a zero pivot means the operator
  // annihilated the Krylov space, so that direction contributes nothing
  Vector y(k, 0.0);
  for (std::size_t ii = k; ii-- > 0;) {
    double s = g[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= r[j][ii] * y[j];
    y[ii] = r[ii][ii] == 0.0 ? 0.0 : s / r[ii][ii];
  }
  for (std::size_t j = 0; j < k; ++j) axpy(y[j], basis[j], out.solution);
  out.residual_norm = std::fabs(g[k]);
  return out;
}

}  // namespace aap
