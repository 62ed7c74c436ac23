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
 * @file fixedpoint.hpp
 * Fixed-point maps and the solver family: Picard, AA(m), restarted AA(m),
 * AAP(m) (m Picard steps followed by one Anderson step) and Newton-GMRES.
 *
 * Notation: f(x) = g(x) - x. Within an AAP global iteration t the sweep
 * x^0 = x_t, x^{l+1} = g(x^l) produces residuals f^0..f^m, and
 *   S = [f^0 .. f^{m-1}],  Y = [f^1 - f^0 .. f^m - f^{m-1}].
 */

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aap/linalg.hpp"

namespace aap {

using VectorMap = std::function<Vector(std::span<const double>)>;
using JvpFunction = std::function<Vector(std::span<const double> x, std::span<const double> v)>;

struct FixedPointMap {
  std::size_t dimension = 0;
  VectorMap eval_g;
  /// Optional direct residual g(x) - x; avoids cancellation near the fixed point.
  VectorMap eval_f;
  /// Optional action of f'(x).
  JvpFunction jvp_f;
  std::optional<double> kappa;
  std::optional<double> gamma;
  /// Optional in-place projection applied to the output of every mixing step.
  std::function<void(std::span<double>)> post_mix;
  /// Optional problem-specific figure of merit reported alongside traces.
  std::function<double(std::span<const double>)> metric;
};

/// g(x) and f(x) from a single map evaluation.
struct MapValue {
  Vector g;
  Vector f;
};
MapValue evaluate(const FixedPointMap& map, std::span<const double> x);

enum class Reference { Oldest, Newest };

/**
 * Points x^0..x^w with their residuals and the difference matrices.
 * AAP histories use the oldest point as reference and set S to the residual
 * columns; sliding-window Anderson histories use the newest point and
 * S = [x^1 - x^0 ..].
 */
struct SecantHistory {
  std::vector<Vector> points;
  Matrix residuals;  // d x (w + 1)
  Matrix s;          // d x w
  Matrix y;          // d x w
  Reference reference = Reference::Oldest;

  std::size_t window() const noexcept { return s.cols(); }
  std::size_t ref_index() const noexcept { return reference == Reference::Oldest ? 0 : points.size() - 1; }
  const Vector& x_ref() const { return points[ref_index()]; }
  std::span<const double> f_ref() const { return residuals.col(ref_index()); }
};

/// Builds a history from points and residuals, filling S and Y.
SecantHistory make_history(std::vector<Vector> points, const std::vector<Vector>& residuals, Reference reference);

struct SolverConfig {
  std::size_t m = 1;
  double beta = 1.0;
  /// Overrides `beta` when set: beta_t = beta_schedule(t).
  std::function<double(std::size_t)> beta_schedule;
  double tol = 1e-10;
  /// Stop on ||f_t|| <= tol * ||f_0|| instead of ||f_t|| <= tol.
  bool relative_tol = false;
  std::size_t max_global_iters = 1000;
  /// 0 means unlimited.
  std::size_t max_g_evals = 0;
  double rank_tol = 1e-12;
  double jvp_fd_step = 1.4901161193847656e-08;
  /// Keep x in every IterationRecord; disable for long runs on large maps.
  bool store_iterates = true;

  double beta_at(std::size_t t) const { return beta_schedule ? beta_schedule(t) : beta; }
  /// Throws InvalidArgument on an inconsistent configuration for dimension d.
  void validate(std::size_t d) const;
};

struct IterationRecord {
  std::size_t t = 0;
  int picard_substep = -1;  // -1 for solvers without sweeps
  Vector x;
  double residual_norm = 0.0;
  std::optional<double> theta;
  Vector alpha;
  std::size_t g_evals_cumulative = 0;
};

enum class SolveStatus { Converged, MaxIters, NumericalBreakdown };
std::string to_string(SolveStatus status);

struct SolveReport {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::MaxIters;
  Vector final_x;
  std::size_t g_evals = 0;
  std::size_t global_iters = 0;
};

/// m Picard steps from x_t: m + 1 evaluations of g.
SecantHistory picard_sweep(const FixedPointMap& map, std::span<const double> x_t, std::size_t m);

struct MixingSolution {
  Vector alpha;  // length w + 1, sums to 1
  Vector z;      // length w
  double theta = 0.0;
  std::size_t rank = 0;
  std::vector<std::size_t> dropped;
};

/// min ||sum alpha^l f^l|| subject to sum alpha = 1, through z = argmin ||Y z - f_ref||.
MixingSolution solve_mixing(const SecantHistory& history, double rank_tol = 1e-12);

struct MixedPoint {
  Vector mixed;  // sum alpha^l x^l
  Vector next;   // mixed + beta sum alpha^l f^l
};
/// Both sums are accumulated relative to the reference point.
MixedPoint mix_points(const SecantHistory& history, std::span<const double> alpha, double beta);
/// Same point from the LS coefficients. Oldest-reference histories use the
/// multisecant form x_t - S z - beta (Y z - f_t), which stays accurate when
/// alpha is large; other histories fall back to the alpha form.
MixedPoint mix_points(const SecantHistory& history, const MixingSolution& mixing, double beta);

struct GlobalStep {
  Vector x_next;
  IterationRecord record;
  SecantHistory history;
  MixingSolution mixing;
};

/// One AAP global iteration (sweep plus Anderson step) with beta = cfg.beta_at(0).
GlobalStep aap_global_step(const FixedPointMap& map, std::span<const double> x_t, const SolverConfig& cfg);

struct MultisecantDirection {
  Vector p_hat;  // S z
  Vector r_hat;  // Y z - f_ref
  Vector z;
};
MultisecantDirection multisecant_direction(const SecantHistory& history, double rank_tol = 1e-12);

struct ApplyHResult {
  Vector value;
  bool rank_deficient = false;
};
/// H v = -beta v + (S + beta Y) Y^+ v, the inverse multisecant operator.
ApplyHResult apply_H(const SecantHistory& history, double beta, std::span<const double> v, double rank_tol = 1e-12);

/// Everything an observer may want to know about one mixing step.
struct MixStep {
  std::size_t t = 0;
  const SecantHistory* history = nullptr;
  const MixingSolution* mixing = nullptr;
  double beta = 1.0;
  const Vector* mixed = nullptr;   // sum alpha^l x^l
  const Vector* x_next = nullptr;  // before post_mix
};
using StepObserver = std::function<void(const MixStep&)>;

SolveReport run_aap(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                    const StepObserver& observer = {});
SolveReport run_picard(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg);
/// Anderson acceleration with a sliding window of the m most recent pairs.
SolveReport run_aa(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                   const StepObserver& observer = {});
/// Anderson acceleration whose window grows to m pairs and then restarts from zero.
SolveReport run_res_aa(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                       const StepObserver& observer = {});
/// Inexact Newton without line search: p = GMRES(m) on f'(x_t) p = f_t, x_{t+1} = x_t - p.
SolveReport run_newton_gmres(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg);

/// Central finite-difference approximation of f'(x) v.
Vector finite_difference_jvp(const FixedPointMap& map, std::span<const double> x, std::span<const double> v,
                             double step);

}  // namespace aap
