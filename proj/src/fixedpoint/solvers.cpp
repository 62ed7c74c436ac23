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
#include <deque>

#include "aap/error.hpp"
#include "aap/fixedpoint.hpp"

namespace aap {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::NumericalBreakdown: return "numerical_breakdown";
  }
  return "unknown";
}

void SolverConfig::validate(std::size_t d) const {
  if (m < 1) throw InvalidArgument("SolverConfig: m must be >= 1");
  if (m > d) throw InvalidArgument("SolverConfig: m must not exceed the dimension");
  if (!(tol > 0.0)) throw InvalidArgument("SolverConfig: tol must be positive");
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw InvalidArgument("SolverConfig: rank_tol must lie in (0, 1)");
  if (!beta_schedule && !(beta >= 0.0)) throw InvalidArgument("SolverConfig: beta must be nonnegative");
  if (!(jvp_fd_step > 0.0)) throw InvalidArgument("SolverConfig: jvp_fd_step must be positive");
}

SecantHistory picard_sweep(const FixedPointMap& map, std::span<const double> x_t, std::size_t m) {
  if (m < 1) throw InvalidArgument("picard_sweep: m must be >= 1");
  if (x_t.size() != map.dimension) throw DimensionMismatch("picard_sweep: x_t has the wrong length");
  std::vector<Vector> points{Vector(x_t.begin(), x_t.end())};
  std::vector<Vector> residuals;
  for (std::size_t l = 0; l <= m; ++l) {
    MapValue v = evaluate(map, points[l]);
    if (!all_finite(v.g) || !all_finite(v.f)) throw NumericalError("picard_sweep: non-finite map value");
    residuals.push_back(std::move(v.f));
    if (l < m) points.push_back(std::move(v.g));
  }
  return make_history(std::move(points), residuals, Reference::Oldest);
}

GlobalStep aap_global_step(const FixedPointMap& map, std::span<const double> x_t, const SolverConfig& cfg) {
  cfg.validate(map.dimension);
  GlobalStep step;
  step.history = picard_sweep(map, x_t, cfg.m);
  step.mixing = solve_mixing(step.history, cfg.rank_tol);
  step.x_next = mix_points(step.history, step.mixing, cfg.beta_at(0)).next;
  if (map.post_mix) map.post_mix(step.x_next);
  step.record.t = 0;
  step.record.picard_substep = static_cast<int>(cfg.m);
  step.record.x = step.history.points.back();
  step.record.residual_norm = norm2(step.history.residuals.col(cfg.m));
  step.record.theta = step.mixing.theta;
  step.record.alpha = step.mixing.alpha;
  step.record.g_evals_cumulative = cfg.m + 1;
  return step;
}

Vector finite_difference_jvp(const FixedPointMap& map, std::span<const double> x, std::span<const double> v,
                             double step) {
  const double vn = norm2(v);
  if (vn == 0.0) return Vector(x.size(), 0.0);
  const double eps = step * (1.0 + norm2(x)) / vn;
  Vector xp(x.begin(), x.end());
  Vector xm(x.begin(), x.end());
  axpy(eps, v, xp);
  axpy(-eps, v, xm);
  Vector out = sub(evaluate(map, xp).f, evaluate(map, xm).f);
  for (double& e : out) e /= 2.0 * eps;
  return out;
}

namespace {

// Shared bookkeeping: evaluation budget, stopping threshold and records.
class Tracker {
 public:
  Tracker(const FixedPointMap& map, const SolverConfig& cfg, SolveReport& report)
      : map_(map), cfg_(cfg), report_(report) {}

  bool can_eval() const { return cfg_.max_g_evals == 0 || report_.g_evals < cfg_.max_g_evals; }

  enum class Outcome { Continue, Converged, Breakdown };

  Outcome eval(std::span<const double> x, std::size_t t, int substep, MapValue& value) {
    ++report_.g_evals;
    value = evaluate(map_, x);
    if (!all_finite(value.g) || !all_finite(value.f)) return Outcome::Breakdown;
    const double fn = norm2(value.f);
    if (threshold_ < 0.0) threshold_ = cfg_.relative_tol ? cfg_.tol * fn : cfg_.tol;
    IterationRecord rec;
    rec.t = t;
    rec.picard_substep = substep;
    if (cfg_.store_iterates) rec.x.assign(x.begin(), x.end());
    rec.residual_norm = fn;
    rec.g_evals_cumulative = report_.g_evals;
    report_.records.push_back(std::move(rec));
    return fn <= threshold_ ? Outcome::Converged : Outcome::Continue;
  }

  /// Extra evaluations that produce no iterate (finite-difference JVPs).
  void charge(std::size_t n) { report_.g_evals += n; }

  IterationRecord& last() { return report_.records.back(); }

  void finish(SolveStatus status, std::span<const double> x) {
    report_.status = status;
    report_.final_x.assign(x.begin(), x.end());
  }

 private:
  const FixedPointMap& map_;
  const SolverConfig& cfg_;
  SolveReport& report_;
  double threshold_ = -1.0;
};

void check_start(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg) {
  if (x0.size() != map.dimension) throw DimensionMismatch("solver: x0 has the wrong length");
  cfg.validate(map.dimension);
}

// Anderson acceleration over a window of recent iterates; `restart` clears
// the window once it has been used with m pairs.
SolveReport run_window_aa(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                          const StepObserver& observer, bool restart) {
  check_start(map, x0, cfg);
  SolveReport report;
  Tracker tr(map, cfg, report);
  Vector x(x0.begin(), x0.end());
  std::deque<Vector> points;
  std::deque<Vector> residuals;

  try {
    for (std::size_t k = 0;; ++k) {
      report.global_iters = k;
      if (k >= cfg.max_global_iters || !tr.can_eval()) {
        tr.finish(SolveStatus::MaxIters, x);
        return report;
      }
      MapValue v;
      const auto outcome = tr.eval(x, k, -1, v);
      if (outcome == Tracker::Outcome::Breakdown) {
        tr.finish(SolveStatus::NumericalBreakdown, x);
        return report;
      }
      if (outcome == Tracker::Outcome::Converged) {
        tr.finish(SolveStatus::Converged, x);
        return report;
      }

      points.push_back(x);
      residuals.push_back(v.f);
      const std::size_t keep = restart ? k % (cfg.m + 1) + 1 : cfg.m + 1;
      while (points.size() > keep) {
        points.pop_front();
        residuals.pop_front();
      }

      const double beta = cfg.beta_at(k);
      Vector next;
      if (points.size() == 1) {
        if (beta == 1.0) {
          next = std::move(v.g);
        } else {
          next = x;
          axpy(beta, v.f, next);
        }
      } else {
        SecantHistory h = make_history({points.begin(), points.end()}, {residuals.begin(), residuals.end()},
                                       Reference::Newest);
        MixingSolution mix = solve_mixing(h, cfg.rank_tol);
        MixedPoint mp = mix_points(h, mix.alpha, beta);
        tr.last().theta = mix.theta;
        tr.last().alpha = mix.alpha;
        if (observer) observer(MixStep{k, &h, &mix, beta, &mp.mixed, &mp.next});
        next = std::move(mp.next);
        if (map.post_mix) map.post_mix(next);
      }
      if (!all_finite(next)) {
        tr.finish(SolveStatus::NumericalBreakdown, x);
        return report;
      }
      x = std::move(next);
    }
  } catch (const NumericalError&) {
    tr.finish(SolveStatus::NumericalBreakdown, x);
    return report;
  }
}

}  // namespace

SolveReport run_aap(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                    const StepObserver& observer) {
  check_start(map, x0, cfg);
  SolveReport report;
  Tracker tr(map, cfg, report);
  Vector x(x0.begin(), x0.end());
  const std::size_t m = cfg.m;

  try {
    for (std::size_t t = 0;; ++t) {
      report.global_iters = t;
      if (t >= cfg.max_global_iters) {
        tr.finish(SolveStatus::MaxIters, x);
        return report;
      }
      std::vector<Vector> points{x};
      std::vector<Vector> residuals;
      for (std::size_t l = 0; l <= m; ++l) {
        if (!tr.can_eval()) {
          tr.finish(SolveStatus::MaxIters, points.back());
          return report;
        }
        MapValue v;
        const auto outcome = tr.eval(points[l], t, static_cast<int>(l), v);
        if (outcome == Tracker::Outcome::Breakdown) {
          tr.finish(SolveStatus::NumericalBreakdown, points[l]);
          return report;
        }
        if (outcome == Tracker::Outcome::Converged) {
          tr.finish(SolveStatus::Converged, points[l]);
          return report;
        }
        residuals.push_back(std::move(v.f));
        if (l < m) points.push_back(std::move(v.g));
      }

      SecantHistory h = make_history(std::move(points), residuals, Reference::Oldest);
      MixingSolution mix = solve_mixing(h, cfg.rank_tol);
      const double beta = cfg.beta_at(t);
      MixedPoint mp = mix_points(h, mix, beta);
      tr.last().theta = mix.theta;
      tr.last().alpha = mix.alpha;
      if (observer) observer(MixStep{t, &h, &mix, beta, &mp.mixed, &mp.next});
      if (map.post_mix) map.post_mix(mp.next);
      if (!all_finite(mp.next)) {
        tr.finish(SolveStatus::NumericalBreakdown, x);
        return report;
      }
      x = std::move(mp.next);
    }
  } catch (const NumericalError&) {
    tr.finish(SolveStatus::NumericalBreakdown, x);
    return report;
  }
}

SolveReport run_picard(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg) {
  check_start(map, x0, cfg);
  SolveReport report;
  Tracker tr(map, cfg, report);
  Vector x(x0.begin(), x0.end());
  try {
    for (std::size_t k = 0;; ++k) {
      report.global_iters = k;
      if (k >= cfg.max_global_iters || !tr.can_eval()) {
        tr.finish(SolveStatus::MaxIters, x);
        return report;
      }
      MapValue v;
      const auto outcome = tr.eval(x, k, -1, v);
      if (outcome != Tracker::Outcome::Continue) {
        tr.finish(outcome == Tracker::Outcome::Converged ? SolveStatus::Converged : SolveStatus::NumericalBreakdown, x);
        return report;
      }
      x = std::move(v.g);
    }
  } catch (const NumericalError&) {
    tr.finish(SolveStatus::NumericalBreakdown, x);
    return report;
  }
}

SolveReport run_aa(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                   const StepObserver& observer) {
  return run_window_aa(map, x0, cfg, observer, false);
}

SolveReport run_res_aa(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg,
                       const StepObserver& observer) {
  return run_window_aa(map, x0, cfg, observer, true);
}

SolveReport run_newton_gmres(const FixedPointMap& map, std::span<const double> x0, const SolverConfig& cfg) {
  check_start(map, x0, cfg);
  SolveReport report;
  Tracker tr(map, cfg, report);
  Vector x(x0.begin(), x0.end());
  try {
    for (std::size_t t = 0;; ++t) {
      report.global_iters = t;
      if (t >= cfg.max_global_iters || !tr.can_eval()) {
        tr.finish(SolveStatus::MaxIters, x);
        return report;
      }
      MapValue v;
      const auto outcome = tr.eval(x, t, -1, v);
      if (outcome != Tracker::Outcome::Continue) {
        tr.finish(outcome == Tracker::Outcome::Converged ? SolveStatus::Converged : SolveStatus::NumericalBreakdown, x);
        return report;
      }
      LinearOperator jac;
      if (map.jvp_f) {
        jac = [&](std::span<const double> u) { return map.jvp_f(x, u); };
      } else {
        jac = [&](std::span<const double> u) {
          tr.charge(2);
          return finite_difference_jvp(map, x, u, cfg.jvp_fd_step);
        };
      }
      const GmresResult gm = arnoldi_gmres(jac, v.f, cfg.m);
      Vector next = x;
      axpy(-1.0, gm.solution, next);
      if (!all_finite(next)) {
        tr.finish(SolveStatus::NumericalBreakdown, x);
        return report;
      }
      x = std::move(next);
    }
  } catch (const NumericalError&) {
    tr.finish(SolveStatus::NumericalBreakdown, x);
    return report;
  }
}

}  // namespace aap
