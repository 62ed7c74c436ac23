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
 * @file linalg.hpp
 * Small dense kernels shared by the solvers and the diagnostics: pivoted QR
 * least squares and Jacobi SVD (both on top of Eigen), Arnoldi GMRES and
 * Lawson-Hanson NNLS.
 *
 * Matrices here are tall and skinny (d x m with m rarely above 20), so all
 * routines favour robustness over blocking or cache tricks.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aap {

using Vector = std::vector<double>;

/// Column-major dense matrix. Columns usually hold iterates or residuals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  /// Builds a matrix from row-major nested lists; handy in tests.
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_columns(const std::vector<Vector>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }
  Vector col_copy(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> v);

  /// First `k` columns.
  Matrix leading_cols(std::size_t k) const;
  Matrix transpose() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// vector helpers
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(double a, std::span<const double> x);
bool all_finite(std::span<const double> x);

Vector multiply(const Matrix& a, std::span<const double> x);
Vector multiply_transpose(const Matrix& a, std::span<const double> x);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);

/// Result of a rank-revealing least-squares solve.
struct LsSolution {
  Vector solution;
  double residual_norm = 0.0;
  std::size_t effective_rank = 0;
  std::vector<std::size_t> dropped_columns;  // sorted, original column indices
};

/**
 * Solves min ||A x - b|| with column-pivoted Householder QR.
 *
 * Columns are retained while |R_kk| / |R_11| >= rank_tol; the others are
 * reported in `dropped_columns` and receive a zero coefficient. A matrix with
 * no columns yields an empty solution whose residual is ||b||.
 */
LsSolution qr_least_squares(const Matrix& a, std::span<const double> b, double rank_tol = 1e-12);

struct SvdResult {
  Matrix u;          // rows x k, k = min(rows, cols)
  Vector sigma;      // descending
  Matrix v;          // cols x k
};

/// Thin SVD by two-sided Jacobi rotations.
SvdResult svd(const Matrix& a);
/// Singular values in descending order, length min(rows, cols).
Vector singular_values(const Matrix& a);
/// Largest singular value; zero for an empty matrix.
double spectral_norm(const Matrix& a);
/// sigma_max / sigma_min; +inf when the smallest singular value is zero.
double condition_number(const Matrix& a);

/// Inverse of a square matrix by full-pivot LU; throws NumericalError if singular.
Matrix inverse(const Matrix& a);

/// A^+ b through the SVD with singular values below rank_tol * sigma_1 discarded.
Vector pseudoinverse_apply(const Matrix& a, std::span<const double> b, double rank_tol = 1e-12);

using LinearOperator = std::function<Vector(std::span<const double>)>;

struct GmresResult {
  Vector solution;
  double residual_norm = 0.0;
  std::size_t iterations = 0;  // Krylov dimension actually used
  bool breakdown = false;
};

/**
 * m steps of GMRES from a zero initial guess: minimises ||A p - b|| over
 * p in K_m(A, b). Arnoldi uses modified Gram-Schmidt with one
 * reorthogonalisation pass and stops early once the new Arnoldi vector has
 * norm below 1e-14 ||b||.
 */
GmresResult arnoldi_gmres(const LinearOperator& matvec, std::span<const double> b, std::size_t m);

/**
 * Lawson-Hanson active-set solve of min ||A x - b|| subject to x >= 0.
 * Throws NnlsNotConverged (carrying the best iterate) after 3 * cols outer
 * iterations.
 */
Vector nnls(const Matrix& a, std::span<const double> b);

/// Eigen-decomposition of a symmetric matrix.
struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns are unit eigenvectors
};
SymmetricEigen symmetric_eigen(const Matrix& a);

}  // namespace aap
