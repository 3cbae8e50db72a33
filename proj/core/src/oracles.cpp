#include "cmv/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cmv/errors.hpp"

namespace cmv {

namespace {

struct TreeWalker {
  const CoefficientSet& coeffs;
  const SamplePath& y;
  const MeasurePath& mu;
  std::vector<double> dy;
  std::vector<double> x;
  std::vector<double> log_kernel;
  // Per node: positions and log kernels of every prefix at that depth.
  std::vector<std::vector<double>> node_x;
  std::vector<std::vector<double>> node_l;

  void descend(std::size_t k) {
    node_x[k].push_back(x[k]);
    node_l[k].push_back(log_kernel[k]);
    const TimeGrid& grid = y.grid;
    if (k == grid.n_steps()) return;
    const double dt = grid.dt();
    const double t = grid.time(k);
    const double sd = std::sqrt(dt);
    const PathArgs args{k, t, std::span<const double>(x).first(k + 1), y.prefix(k), &mu};
    const double h = eval_h(coeffs, grid, k, x[k], y.prefix(k));
    const double drift = coeffs.drift ? (*coeffs.drift)(args) * dt : 0.0;
    const double vol = coeffs.sigma(args);
    const double next_l = log_kernel[k] + h * dy[k] - 0.5 * h * h * dt;
    for (double db : {-sd, sd}) {
      x[k + 1] = x[k] + drift + vol * db;
      log_kernel[k + 1] = next_l;
      descend(k + 1);
    }
  }
};

}  // namespace

MeasurePath tree_apply_t(const TreeInstance& instance, const MeasurePath& mu_path) {
  const TimeGrid& grid = instance.y_path.grid;
  if (grid.n_steps() > kMaxTreeSteps) {
    throw TreeTooLarge(fmt::format("tree oracle: {} steps exceeds the limit of {}", grid.n_steps(), kMaxTreeSteps));
  }
  if (!(mu_path.grid == grid)) throw GridMismatch("tree oracle: measure path grid differs from instance grid");

  TreeWalker walker{instance.coeffs, instance.y_path, mu_path, increments_of(instance.y_path),
                    std::vector<double>(grid.n_nodes()), std::vector<double>(grid.n_nodes()),
                    std::vector<std::vector<double>>(grid.n_nodes()), std::vector<std::vector<double>>(grid.n_nodes())};
  walker.x[0] = instance.coeffs.x0;
  walker.log_kernel[0] = 0.0;
  walker.descend(0);

  // Each depth-k prefix carries probability 2^-k, uniform within the node,
  // so the law is the kernel-weighted law of the prefixes.
  std::vector<DiscreteMeasure> laws;
  laws.reserve(grid.n_nodes());
  for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
    const auto& l = walker.node_l[k];
    const double top = *std::max_element(l.begin(), l.end());
    std::vector<double> w(l.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(l[i] - top);
    laws.push_back(normalize(walker.node_x[k], w));
  }
  return MeasurePath(grid, std::move(laws));
}

MeasurePath tree_fixed_point(const TreeInstance& instance, double tol, std::size_t max_iter) {
  const TimeGrid& grid = instance.y_path.grid;
  MeasurePath current = constant_path(grid, DiscreteMeasure::dirac(instance.coeffs.x0));
  std::vector<double> trace;
  for (std::size_t it = 0; it < max_iter; ++it) {
    MeasurePath next = tree_apply_t(instance, current);
    const double d = sup_w1_path(next, current, grid.n_steps());
    trace.push_back(d);
    current = std::move(next);
    if (d <= tol || !instance.coeffs.measure_dependent) return current;
  }
  throw NonConvergence("tree_fixed_point: no convergence", trace);
}

KalmanPosterior kalman_posterior(const KalmanSpec& spec, const SamplePath& y_path) {
  if (!(spec.sigma0 > 0.0) || !(spec.p0 >= 0.0)) throw InvalidArgument("kalman: need sigma0 > 0 and p0 >= 0");
  const TimeGrid& grid = y_path.grid;
  const double dt = grid.dt();
  std::vector<double> m(grid.n_nodes()), p(grid.n_nodes());
  m[0] = spec.x0;
  p[0] = spec.p0;
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    const double dy = y_path[k + 1] - y_path[k];
    m[k + 1] = m[k] + spec.c * p[k] * (dy - spec.c * m[k] * dt);
    p[k + 1] = std::max(0.0, p[k] + (spec.sigma0 * spec.sigma0 - spec.c * spec.c * p[k] * p[k]) * dt);
  }
  return KalmanPosterior{SamplePath(grid, std::move(m)), SamplePath(grid, std::move(p))};
}

double cdf_integral_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::size_t resolution) {
  if (resolution == 0) throw InvalidArgument("cdf_integral_w1: resolution must be positive");
  const double lo = std::min(mu.atoms().front(), nu.atoms().front());
  const double hi = std::max(mu.atoms().back(), nu.atoms().back());
  if (!(hi > lo)) return 0.0;
  const double dx = (hi - lo) / static_cast<double>(resolution);
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  for (std::size_t cell = 0; cell < resolution; ++cell) {
    const double x = lo + (static_cast<double>(cell) + 0.5) * dx;
    while (i < mu.size() && mu.atoms()[i] <= x) fa += mu.weights()[i++];
    while (j < nu.size() && nu.atoms()[j] <= x) fb += nu.weights()[j++];
    total += std::abs(fa - fb);
  }
  return total * dx;
}

}  // namespace cmv
