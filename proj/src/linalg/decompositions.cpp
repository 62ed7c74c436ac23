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
#include <limits>

#include <Eigen/Dense>

#include "aap/error.hpp"
#include "aap/linalg.hpp"

namespace aap {

namespace {

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;

ConstMap view(const Matrix& a) {
  return ConstMap(a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  std::copy(e.data(), e.data() + e.size(), m.data().begin());
  return m;
}

}  // namespace

LsSolution qr_least_squares(const Matrix& a, std::span<const double> b, double rank_tol) {
  if (a.rows() != b.size()) throw DimensionMismatch("qr_least_squares: A.rows != b.length");
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw InvalidArgument("qr_least_squares: rank_tol must lie in (0, 1)");

  LsSolution out;
  out.solution.assign(a.cols(), 0.0);
  if (a.cols() == 0) {
    out.residual_norm = norm2(b);
    return out;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(view(a));
  qr.setThreshold(rank_tol);
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  const auto rank = static_cast<std::size_t>(qr.rank());
  out.effective_rank = rank;

  if (rank > 0) {
    // solve() zeroes the coefficients of the non-retained pivots
    const Eigen::VectorXd x = qr.solve(rhs);
    std::copy(x.data(), x.data() + x.size(), out.solution.begin());
  }
  const auto& perm = qr.colsPermutation().indices();
  for (std::size_t k = rank; k < a.cols(); ++k) out.dropped_columns.push_back(static_cast<std::size_t>(perm[static_cast<Eigen::Index>(k)]));
  std::sort(out.dropped_columns.begin(), out.dropped_columns.end());

  Vector res = multiply(a, out.solution);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
  out.residual_norm = norm2(res);
  return out;
}

SvdResult svd(const Matrix& a) {
  if (!all_finite(a.data())) throw NumericalError("svd: non-finite entries");
  if (a.empty()) return {Matrix(a.rows(), 0), {}, Matrix(a.cols(), 0)};
  Eigen::JacobiSVD<Eigen::MatrixXd> s(view(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = s.singularValues();
  return {from_eigen(s.matrixU()), Vector(sv.data(), sv.data() + sv.size()), from_eigen(s.matrixV())};
}

Vector singular_values(const Matrix& a) {
  if (!all_finite(a.data())) throw NumericalError("singular_values: non-finite entries");
  if (a.empty()) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> s(view(a));
  const Eigen::VectorXd& sv = s.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  return singular_values(a).front();
}

double condition_number(const Matrix& a) {
  if (a.empty()) return 1.0;
  const Vector s = singular_values(a);
  if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / s.back();
}

Vector pseudoinverse_apply(const Matrix& a, std::span<const double> b, double rank_tol) {
  if (a.rows() != b.size()) throw DimensionMismatch("pseudoinverse_apply: A.rows != b.length");
  Vector x(a.cols(), 0.0);
  if (a.empty()) return x;
  const SvdResult s = svd(a);
  const double cutoff = rank_tol * s.sigma.front();
  for (std::size_t k = 0; k < s.sigma.size(); ++k) {
    if (s.sigma[k] == 0.0 || s.sigma[k] < cutoff) break;
    axpy(dot(s.u.col(k), b) / s.sigma[k], s.v.col(k), x);
  }
  return x;
}

Matrix inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("inverse: matrix is not square");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(view(a));
  if (!lu.isInvertible()) throw NumericalError("inverse: matrix is singular");
  return from_eigen(lu.inverse());
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  if (a.cols() != a.rows()) throw DimensionMismatch("symmetric_eigen: matrix is not square");
  if (a.empty()) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(view(a));
  if (es.info() != Eigen::Success) throw NumericalError("symmetric_eigen: no convergence");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return {Vector(ev.data(), ev.data() + ev.size()), from_eigen(es.eigenvectors())};
}

}  // namespace aap
