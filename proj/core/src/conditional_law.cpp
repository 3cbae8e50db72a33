#include "cmv/conditional_law.hpp"

#include <algorithm>
#include <cmath>

#include "cmv/errors.hpp"

namespace cmv {

DiscreteMeasure ks_law(std::span<const double> x, std::span<const double> log_kernel) {
  if (x.empty() || x.size() != log_kernel.size()) throw InvalidArgument("ks_law: empty or mismatched particles");
  const double top = *std::max_element(log_kernel.begin(), log_kernel.end());
  std::vector<double> w(log_kernel.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_kernel[i] - top);
  return normalize(x, w);
}

DiscreteMeasure ks_law_at(const ParticleEnsemble& ensemble, std::size_t t_node) {
  if (t_node > ensemble.grid().n_steps()) throw InvalidArgument("ks_law_at: node out of range");
  std::vector<double> x(ensemble.n_particles()), l(ensemble.n_particles());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = ensemble.x(i, t_node);
    l[i] = ensemble.log_kernel(i, t_node);
  }
  return ks_law(x, l);
}

double effective_sample_size(const ParticleEnsemble& ensemble, std::size_t t_node) {
  const KernelValues kv = kernel_values(ensemble, t_node);
  double sum = 0.0, sum_sq = 0.0;
  for (double l : kv.kernel) sum += l;
  for (double l : kv.kernel) sum_sq += (l / sum) * (l / sum);
  return 1.0 / sum_sq;
}

namespace {

MeasurePath simulate_laws(const TMapContext& ctx, const MeasurePath& mu_path, std::size_t last_node) {
  const TimeGrid& grid = ctx.grid();
  const std::size_t n = ctx.sim.n_particles;
  // Node-major scatter so that each node's law is built from contiguous data.
  std::vector<std::vector<double>> xs(last_node + 1, std::vector<double>(n));
  std::vector<std::vector<double>> ls(last_node + 1, std::vector<double>(n));
  simulate_particles(ctx.coeffs, mu_path, ctx.y_path, ctx.sim,
                     [&](std::size_t i, std::span<const double> x, std::span<const double> l) {
                       for (std::size_t k = 0; k <= last_node; ++k) {
                         xs[k][i] = x[k];
                         ls[k][i] = l[k];
                       }
                     });
  std::vector<DiscreteMeasure> laws;
  laws.reserve(grid.n_nodes());
  for (std::size_t k = 0; k <= last_node; ++k) {
    laws.push_back(ks_law(xs[k], ls[k]));
    std::vector<double>().swap(xs[k]);
    std::vector<double>().swap(ls[k]);
  }
  for (std::size_t k = last_node + 1; k < grid.n_nodes(); ++k) laws.push_back(laws[last_node]);
  return MeasurePath(grid, std::move(laws));
}

}  // namespace

MeasurePath apply_t(const TMapContext& ctx, const MeasurePath& mu_path) {
  return simulate_laws(ctx, mu_path, ctx.grid().n_steps());
}

MeasurePath apply_t_localized(const TMapContext& ctx, const MeasurePath& mu_path, std::size_t tau_node) {
  if (tau_node > ctx.grid().n_steps()) throw InvalidArgument("apply_t_localized: stopping node out of range");
  return simulate_laws(ctx, mu_path, tau_node);
}

}  // namespace cmv
