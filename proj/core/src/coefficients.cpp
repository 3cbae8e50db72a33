#include "cmv/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cmv/errors.hpp"
#include "cmv/rng.hpp"

namespace cmv {

namespace {

// max_x |tanh''(x)| = 4 / (3 sqrt 3), rounded up.
constexpr double kTanhSecondDerivativeBound = 0.7698004;

double param(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) throw InvalidArgument(fmt::format("scenario parameter '{}' must be a number", key));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InvalidArgument(fmt::format("scenario parameter '{}' must be finite", key));
  return d;
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

DiscreteMeasure random_measure(Engine& engine) {
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> atom(-5.0, 5.0);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const int n = count(engine);
  std::vector<double> a(n), w(n);
  for (int i = 0; i < n; ++i) {
    a[i] = atom(engine);
    w[i] = weight(engine);
  }
  return normalize(a, w);
}

MeasurePath random_measure_path(const TimeGrid& grid, Engine& engine) {
  std::vector<DiscreteMeasure> m;
  m.reserve(grid.n_nodes());
  for (std::size_t k = 0; k < grid.n_nodes(); ++k) m.push_back(random_measure(engine));
  return MeasurePath(grid, std::move(m));
}

}  // namespace

double eval_h(const CoefficientSet& coeffs, const TimeGrid& grid, std::size_t node, double x,
              std::span<const double> y_prefix) {
  if (node > grid.n_steps() || y_prefix.size() != node + 1) {
    throw InvalidArgument(fmt::format("eval_h: y prefix has {} values, node {} needs {}", y_prefix.size(),
                                      node, node + 1));
  }
  const double t = grid.time(node);
  double h = 0.0;
  for (const auto& factor : coeffs.h_factors) h += factor.f(t, x) * factor.g(t, y_prefix);
  return h;
}

void ValidationReport::throw_if_failed() const {
  if (passed) return;
  if (!witness) throw ValidationFailure("coefficient validation failed");
  throw ValidationFailure(fmt::format("coefficient validation failed: {} observed {:.6g} > declared {:.6g} "
                                      "at t={:.6g}, x={:.6g}, y={:.6g}",
                                      witness->check, witness->observed, witness->declared, witness->t,
                                      witness->x, witness->y));
}

ValidationReport validate(const CoefficientSet& coeffs, std::size_t probe_budget, std::uint64_t seed,
                          double horizon) {
  if (probe_budget < 1) throw InvalidArgument("validate: probe budget must be at least 1");
  constexpr double kSlack = 1e-9;
  constexpr double kFdStep = 1e-4;
  // Finite-difference derivatives carry O(eps_machine / h^2) rounding noise.
  constexpr double kFdRelTol = 1e-6;

  const TimeGrid grid(horizon, 8);
  Engine engine(stream_seed(seed, kProbeStream));
  std::uniform_real_distribution<double> xdist(-10.0, 10.0);
  std::uniform_real_distribution<double> ydist(-5.0, 5.0);
  std::uniform_real_distribution<double> bump(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> nodedist(0, grid.n_steps());

  ValidationReport report;
  auto fail = [&](const char* check, const PathArgs& a, double observed, double declared) {
    if (report.passed) report.witness = ValidationProbe{check, a.t, a.x(), a.y(), observed, declared};
    report.passed = false;
  };

  std::vector<double> xs(grid.n_nodes()), xs2(grid.n_nodes()), ys(grid.n_nodes());
  for (std::size_t p = 0; p < probe_budget; ++p) {
    const std::size_t node = nodedist(engine);
    for (auto& v : xs) v = xdist(engine);
    for (auto& v : ys) v = ydist(engine);
    const int mode = static_cast<int>(p % 3);  // 0: both, 1: x only, 2: measure only
    for (std::size_t k = 0; k < xs.size(); ++k) xs2[k] = mode == 2 ? xs[k] : xs[k] + bump(engine);
    const MeasurePath mu = random_measure_path(grid, engine);
    const MeasurePath mu2 = mode == 1 ? mu : random_measure_path(grid, engine);

    const auto xp = std::span<const double>(xs).first(node + 1);
    const auto xp2 = std::span<const double>(xs2).first(node + 1);
    const auto yp = std::span<const double>(ys).first(node + 1);
    const PathArgs a{node, grid.time(node), xp, yp, &mu};
    const PathArgs b{node, grid.time(node), xp2, yp, &mu2};

    double dist = sup_abs_diff(xp, xp2);
    double wdist = 0.0;
    for (std::size_t k = 0; k <= node; ++k) wdist = std::max(wdist, exact_w1(mu[k], mu2[k]));
    dist += wdist;

    const double s1 = coeffs.sigma(a);
    const double s2 = coeffs.sigma(b);
    report.max_sigma = std::max({report.max_sigma, std::abs(s1), std::abs(s2)});
    if (std::abs(s1) > coeffs.sigma_bound + kSlack) fail("sigma bound", a, std::abs(s1), coeffs.sigma_bound);
    if (dist > 0.0) {
      const double ratio = std::abs(s1 - s2) / dist;
      report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
      if (ratio > coeffs.lipschitz + kSlack) fail("sigma Lipschitz ratio", a, ratio, coeffs.lipschitz);
    }
    if (!coeffs.measure_dependent) {
      const PathArgs c{node, grid.time(node), xp, yp, &mu2};
      const double s3 = coeffs.sigma(c);
      if (s3 != s1) fail("sigma measure independence", a, std::abs(s3 - s1), 0.0);
    }

    if (coeffs.drift) {
      const double b1 = (*coeffs.drift)(a);
      const double b2 = (*coeffs.drift)(b);
      report.max_drift = std::max({report.max_drift, std::abs(b1), std::abs(b2)});
      if (std::abs(b1) > coeffs.drift_bound + kSlack) fail("drift bound", a, std::abs(b1), coeffs.drift_bound);
      if (dist > 0.0) {
        const double ratio = std::abs(b1 - b2) / dist;
        report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
        if (ratio > coeffs.lipschitz + kSlack) fail("drift Lipschitz ratio", a, ratio, coeffs.lipschitz);
      }
      if (!coeffs.measure_dependent) {
        const PathArgs c{node, grid.time(node), xp, yp, &mu2};
        if ((*coeffs.drift)(c) != b1) fail("drift measure independence", a, 0.0, 0.0);
      }
    }

    const double h = eval_h(coeffs, grid, node, a.x(), yp);
    report.max_h = std::max(report.max_h, std::abs(h));
    if (std::abs(h) > coeffs.h_bound + kSlack) fail("h bound", a, std::abs(h), coeffs.h_bound);

    const double t = a.t;
    const double x = a.x();
    for (const auto& factor : coeffs.h_factors) {
      const double f0 = factor.f(t, x);
      const double fp = factor.f(t, x + kFdStep);
      const double fm = factor.f(t, x - kFdStep);
      const double g = factor.g(t, yp);
      if (std::abs(f0) > factor.f_bound + kSlack) fail("f bound", a, std::abs(f0), factor.f_bound);
      if (std::abs(g) > factor.g_bound + kSlack) fail("g bound", a, std::abs(g), factor.g_bound);
      const double d1 = std::abs(fp - fm) / (2.0 * kFdStep);
      report.max_f_dx = std::max(report.max_f_dx, d1);
      if (d1 > factor.f_dx_bound * (1.0 + kFdRelTol) + kFdRelTol) fail("f' bound", a, d1, factor.f_dx_bound);
      if (std::isfinite(factor.f_dxx_bound)) {
        const double d2 = std::abs(fp - 2.0 * f0 + fm) / (kFdStep * kFdStep);
        report.max_f_dxx = std::max(report.max_f_dxx, d2);
        if (d2 > factor.f_dxx_bound * (1.0 + kFdRelTol) + kFdRelTol) {
          fail("f'' bound", a, d2, factor.f_dxx_bound);
        }
      }
    }
    ++report.probes;
  }
  return report;
}

std::vector<std::string> builtin_names() {
  return {"constant", "meanfield-tanh", "linear-clipped", "no-observation"};
}

CoefficientSet builtin(const std::string& name, const nlohmann::json& params) {
  if (!params.is_object()) throw InvalidArgument("scenario parameters must be a JSON object");
  const double x0 = param(params, "x0", name == "meanfield-tanh" ? 0.5 : 0.0);
  const double s0 = param(params, "s0", 1.0);
  const double c = param(params, "c", name == "linear-clipped" ? 0.5 : 1.0);

  auto unit_g = [](double, std::span<const double>) { return 1.0; };
  auto constant_sigma = [s0](const PathArgs&) { return s0; };

  CoefficientSet cs;
  cs.name = name;
  cs.x0 = x0;
  cs.lipschitz = 1.0;

  if (name == "constant") {
    cs.sigma = constant_sigma;
    cs.sigma_bound = std::abs(s0);
    cs.h_factors.push_back(HFactor{[c](double, double x) { return c * std::tanh(x); }, unit_g, std::abs(c),
                                   std::abs(c), kTanhSecondDerivativeBound * std::abs(c), 1.0});
    cs.h_bound = std::abs(c);
  } else if (name == "meanfield-tanh") {
    const double s1 = param(params, "s1", 0.5);
    cs.sigma = [s0, s1](const PathArgs& a) { return s0 + s1 * std::tanh(a.mu_now().mean()); };
    cs.sigma_bound = std::abs(s0) + std::abs(s1);
    cs.lipschitz = s1 != 0.0 ? std::abs(s1) : 1.0;
    cs.measure_dependent = s1 != 0.0;
    cs.h_factors.push_back(HFactor{[c](double, double x) { return c * std::tanh(x); },
                                   [](double, std::span<const double> y) { return std::cos(y.back()); },
                                   std::abs(c), std::abs(c), kTanhSecondDerivativeBound * std::abs(c), 1.0});
    cs.h_bound = std::abs(c);
  } else if (name == "linear-clipped") {
    const double radius = param(params, "R", 8.0);
    if (!(radius > 0.0)) throw InvalidArgument("linear-clipped: R must be positive");
    cs.sigma = constant_sigma;
    cs.sigma_bound = std::abs(s0);
    cs.h_factors.push_back(HFactor{[c, radius](double, double x) { return c * std::clamp(x, -radius, radius); },
                                   unit_g, std::abs(c) * radius, std::abs(c),
                                   std::numeric_limits<double>::infinity(), 1.0});
    cs.h_bound = std::abs(c) * radius;
  } else if (name == "no-observation") {
    cs.sigma = constant_sigma;
    cs.sigma_bound = std::abs(s0);
    cs.h_factors.push_back(HFactor{[](double, double) { return 0.0; },
                                   [](double, std::span<const double>) { return 0.0; }, 0.0, 0.0, 0.0, 0.0});
    cs.h_bound = 0.0;
  } else {
    throw UnknownScenario("unknown scenario '" + name + "'");
  }
  return cs;
}

}  // namespace cmv
