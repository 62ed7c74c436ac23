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
 * @file diagnostics.hpp
 * Per-iteration quantities that tie AAP to Newton-GMRES: the optimization
 * gain theta_t, the multisecant error E_t = (J S - Y) S^+, the Krylov matrix
 * G_t = [f, g' f, .., g'^{m-1} f], the Jacobian-GMRES gain and the a-priori
 * bounds these quantities are expected to satisfy.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aap/fixedpoint.hpp"
#include "aap/linalg.hpp"

namespace aap {

enum class JacobianMode { Analytic, FiniteDifference, ExplicitDense };

/// Access to J = f'(x). Dense mode multiplies by an explicitly formed matrix.
struct JacobianAccess {
  JacobianMode mode = JacobianMode::Analytic;
  JvpFunction jvp;
  std::function<Matrix(std::span<const double>)> dense;

  Vector apply(std::span<const double> x, std::span<const double> v) const;
  /// Column-by-column J(x); uses `dense` when present.
  Matrix matrix(std::span<const double> x, std::size_t d) const;

  static JacobianAccess analytic(JvpFunction jvp);
  static JacobianAccess finite_difference(const FixedPointMap& map, double step = 1.4901161193847656e-08);
  static JacobianAccess explicit_dense(std::function<Matrix(std::span<const double>)> jac);
  /// Analytic when the map has jvp_f, finite differences otherwise.
  static JacobianAccess from_map(const FixedPointMap& map, double step = 1.4901161193847656e-08);
};

/// Randomised check ||J(u+v) - Ju - Jv|| <= tol (||u|| + ||v||) * scale.
bool linearity_spot_check(const JacobianAccess& jac, std::span<const double> x, double scale, std::uint64_t seed,
                          double tol = 1e-4, int probes = 3);

/// ||(I - P_Y) f_ref|| / ||f_ref||.
double optimization_gain(const SecantHistory& history);

struct MultisecantError {
  double norm = 0.0;
  std::size_t rank = 0;
  bool degenerate = false;  // S lost rank; the norm uses the retained part only
};
MultisecantError multisecant_error(const SecantHistory& history, const JacobianAccess& jac, std::span<const double> x_t,
                                   double rank_tol = 1e-12);

/// gamma m^{3/2} cond(S) ||f||.
double et_upper_bound(const SecantHistory& history, double gamma, double f_norm);

/// Columns g'^l f_t for l = 0..m-1 with g' v = v + jvp_f(v).
Matrix krylov_matrix_G(const LinearOperator& jvp_g, std::span<const double> f_t, std::size_t m);

struct SgDistance {
  double s_minus_g = 0.0;   // ||S - G||
  double y_minus_jg = 0.0;  // ||Y - J G||
};
SgDistance s_g_distance(const SecantHistory& history, const Matrix& g, const JacobianAccess& jac,
                        std::span<const double> x_t);

/// min over K_m(J, f) of ||J p - f|| divided by ||f||.
double jacobian_gmres_gain(const JacobianAccess& jac, std::span<const double> x_t, std::span<const double> f_t,
                           std::size_t m);

/// 2 ((sqrt(c) - 1) / (sqrt(c) + 1))^m.
double spd_gain_upper(double cond_j, std::size_t m);

struct VandermondeBound {
  double value = 0.0;
  double sigma_min = 0.0;  // of the d x m Vandermonde matrix
  bool degenerate = false;
};
/// sqrt(m) / (min|a_i| sigma_min(V_m(lambda))) with V(i, j) = lambda_i^j.
VandermondeBound vandermonde_cond_bound(std::span<const double> eigs, std::span<const double> coeffs, std::size_t m);

/// [(1-beta) + beta kappa] theta ||f|| + sqrt(1-theta^2) ||B^-1|| [(gamma/2) sqrt(1-theta^2) ||B^-1|| + C_E] ||f||^2.
double one_step_bound(double theta, double beta, double kappa, double gamma, double b_inv_norm, double c_e,
                      double f_norm);

/**
 * ||B^-1|| for B = Ybar Sbar^-1, where Sbar = [S, R1] and Ybar = [Y, R2]
 * extend the history with random columns. Every such B satisfies B S = Y;
 * the smallest norm over `draws` extensions is returned.
 */
double completion_inverse_norm(const SecantHistory& history, std::uint64_t seed, int draws = 4);

struct DiagnosticsRecord {
  std::size_t t = 0;
  double f_norm = 0.0;
  double theta = 0.0;
  double jac_gmres_gain = 0.0;
  double et_norm = 0.0;
  bool et_degenerate = false;
  std::optional<double> et_bound;
  double cond_s = 0.0;
  double cond_y = 0.0;
  double cond_g = 0.0;
  double s_minus_g_norm = 0.0;
  double y_minus_jg_norm = 0.0;
  double sigma_min_y_over_f = 0.0;
  /// ||J p_hat - f|| / ||f||, the forcing term of the equivalent inexact Newton step.
  double forcing_term = 0.0;
  std::optional<double> spd_gain_upper;
  std::optional<double> vandermonde_upper;
  std::optional<double> b_inv_norm;
};

struct DiagnosticsOptions {
  /// Treat J as symmetric definite and report spd_gain_upper from its spectrum.
  bool spd_bound = false;
  /// Treat g' as symmetric and report the Vandermonde bound on cond(G).
  bool vandermonde = false;
  /// Largest dimension for which a random invertible completion is formed.
  std::size_t completion_max_dim = 16;
  std::uint64_t completion_seed = 7;
  double rank_tol = 1e-12;
  double fd_step = 1.4901161193847656e-08;
};

/// All diagnostics for one AAP mixing step taken at x_t = history.points[0].
DiagnosticsRecord compute_diagnostics(const MixStep& step, const FixedPointMap& map, const JacobianAccess& jac,
                                      const DiagnosticsOptions& options = {});

struct InstrumentedRun {
  SolveReport report;
  std::vector<DiagnosticsRecord> diagnostics;
};
InstrumentedRun run_aap_instrumented(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                                     const DiagnosticsOptions& options = {});

}  // namespace aap
