#include "cmv/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "cmv/errors.hpp"
#include "cmv/reference_sim.hpp"

namespace cmv {

void LocalizationConfig::check() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidArgument("localization: C1 and C2 must be positive");
  if (thresholds.empty()) throw InvalidArgument("localization: need at least one threshold");
  for (std::size_t j = 1; j < thresholds.size(); ++j) {
    if (!(thresholds[j - 1] < thresholds[j])) throw InvalidArgument("localization: thresholds must increase strictly");
  }
  if (!(thresholds.front() > c1)) throw InvalidArgument("localization: smallest threshold must exceed C1");
}

LocalizationConfig calibrated_localization(const CoefficientSet& coeffs, double horizon) {
  const double sigma = coeffs.sigma_bound;
  const double drift = coeffs.drift ? coeffs.drift_bound : 0.0;
  double a = 0.0, b = 0.0;
  for (const auto& f : coeffs.h_factors) {
    const double curvature = std::isfinite(f.f_dxx_bound) ? f.f_dxx_bound : 0.0;
    a += f.f_bound + f.f_dx_bound * drift * horizon + 0.5 * curvature * sigma * sigma * horizon;
    b += f.f_dx_bound * sigma;
  }
  LocalizationConfig loc;
  if (coeffs.h_bound == 0.0) {
    loc.c1 = 4.0;
  } else {
    loc.c1 = 16.0 * std::numbers::e * (1.0 + std::exp(2.0 * coeffs.h_bound * coeffs.h_bound * horizon));
  }
  loc.c2 = std::max(4.0 * a * a + 8.0 * b * b * horizon, 1e-12);
  loc.thresholds.clear();
  for (int j = 0; j <= 9; ++j) loc.thresholds.push_back(loc.c1 * std::exp(std::ldexp(1.0, j)));
  return loc;
}

SamplePath a_process(const SamplePath& z_path, const LocalizationConfig& loc) {
  const SamplePath sup = running_sup_path(z_path);
  std::vector<double> a(sup.values.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = loc.c1 * std::exp(loc.c2 * sup[k] * sup[k]);
    if (!std::isfinite(a[k])) throw NumericOverflow("a_process: monitor overflowed", k);
  }
  return SamplePath(z_path.grid, std::move(a));
}

SamplePath z_envelope(const CoefficientSet& coeffs, const SamplePath& y_path) {
  std::vector<double> env(y_path.grid.n_nodes(), 0.0);
  for (const auto& factor : coeffs.h_factors) {
    const SamplePath z = compute_z(factor.g, y_path);
    for (std::size_t k = 0; k < env.size(); ++k) env[k] = std::max(env[k], std::abs(z[k]));
  }
  return SamplePath(y_path.grid, std::move(env));
}

std::size_t tau_node(const SamplePath& a_path, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("tau_node: threshold must be positive");
  for (std::size_t k = 0; k < a_path.values.size(); ++k) {
    if (a_path[k] > threshold) return k;
  }
  return a_path.grid.n_steps();
}

LevelResult solve_level(const TMapContext& ctx, const MeasurePath& mu0, std::size_t tau, double tol,
                        std::size_t max_iter) {
  if (tau > ctx.grid().n_steps()) throw InvalidArgument("solve_level: stopping node out of range");
  if (!(tol > 0.0)) throw InvalidArgument("solve_level: tol must be positive");
  if (max_iter == 0) throw NonConvergence("solve_level: max_iter is zero", {});

  if (!ctx.coeffs.measure_dependent) {
    return LevelResult{apply_t_localized(ctx, mu0, tau), 1, {0.0}};
  }
  LevelResult result{mu0, 0, {}};
  for (std::size_t it = 1; it <= max_iter; ++it) {
    MeasurePath next = apply_t_localized(ctx, result.path, tau);
    const double d = sup_w1_path(next, result.path, tau);
    result.distances.push_back(d);
    result.path = std::move(next);
    result.iterations = it;
    if (d <= tol) return result;
  }
  throw NonConvergence(fmt::format("solve_level: no convergence to tol {} within {} iterations", tol, max_iter),
                       result.distances);
}

FixedPointReport solve(const TMapContext& ctx, const MeasurePath& mu0, const LocalizationConfig& loc, double tol,
                       std::size_t max_iter) {
  loc.check();
  if (!(mu0.grid == ctx.grid())) throw GridMismatch("solve: initial iterate is on a different grid");
  const std::size_t n = ctx.grid().n_steps();
  const SamplePath monitor = a_process(z_envelope(ctx.coeffs, ctx.y_path), loc);

  FixedPointReport report{.final_path = mu0};
  report.localization = loc;
  report.tol = tol;
  report.max_iter = max_iter;

  // A measure-independent mapping is constant: every level is the full
  // image frozen at its stopping node, which equals the localized image.
  std::optional<MeasurePath> constant_image;
  auto run_level = [&](const MeasurePath& from, std::size_t tau) {
    if (ctx.coeffs.measure_dependent) return solve_level(ctx, from, tau, tol, max_iter);
    if (max_iter == 0) throw NonConvergence("solve: max_iter is zero", {});
    if (!constant_image) constant_image = apply_t(ctx, mu0);
    return LevelResult{freeze_after(*constant_image, tau), 1, {0.0}};
  };

  MeasurePath seed = mu0;
  std::size_t reached = 0;
  bool any_level = false;
  for (double threshold : loc.thresholds) {
    const std::size_t tau = tau_node(monitor, threshold);
    if (any_level && tau == reached) continue;
    LevelResult level = run_level(seed, tau);
    const std::size_t level_index = report.tau_ladder.size();
    for (std::size_t j = 0; j < level.distances.size(); ++j) {
      report.distances.push_back(level.distances[j]);
      report.distance_level.push_back(level_index);
      if (j > 0 && level.distances[j - 1] > 0.0) {
        report.contraction_ratios.push_back(level.distances[j] / level.distances[j - 1]);
      }
    }
    report.thresholds_used.push_back(threshold);
    report.tau_ladder.push_back(tau);
    report.iterations_per_level.push_back(level.iterations);
    report.level_paths.push_back(level.path);
    seed = std::move(level.path);
    reached = tau;
    any_level = true;
    if (tau == n) break;
  }
  if (reached != n) {
    throw LevelExhaustion(fmt::format("solve: thresholds exhausted with tau at node {} of {}", reached, n));
  }

  // Patch: node k comes from the first level whose stopping node covers it.
  std::vector<DiscreteMeasure> patched;
  patched.reserve(ctx.grid().n_nodes());
  std::size_t level = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    while (k > report.tau_ladder[level]) ++level;
    patched.push_back(report.level_paths[level][k]);
  }
  report.final_path = MeasurePath(ctx.grid(), std::move(patched));
  report.converged = true;
  return report;
}

UniquenessResult uniqueness_probe(const TMapContext& ctx, const MeasurePath& mu0_a, const MeasurePath& mu0_b,
                                  const LocalizationConfig& loc, double tol, std::size_t max_iter) {
  UniquenessResult r{solve(ctx, mu0_a, loc, tol, max_iter), solve(ctx, mu0_b, loc, tol, max_iter)};
  r.discrepancy = sup_w1_path(r.a.final_path, r.b.final_path, ctx.grid().n_steps());
  r.passed = r.discrepancy <= 2.0 * tol;
  return r;
}

bool eventually_decreasing(const std::vector<double>& trace) {
  if (trace.empty()) return false;
  if (trace.size() == 1) return true;
  const auto peak = static_cast<std::size_t>(std::max_element(trace.begin(), trace.end()) - trace.begin());
  for (std::size_t j = peak + 1; j < trace.size(); ++j) {
    if (trace[j] > trace[j - 1]) return false;
  }
  return trace.back() < trace[peak];
}

}  // namespace cmv
