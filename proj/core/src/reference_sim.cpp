#include "cmv/reference_sim.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cmv/errors.hpp"
#include "cmv/rng.hpp"

namespace cmv {

ParticleEnsemble::ParticleEnsemble(SamplePath y_path, std::size_t n_particles, std::uint64_t master_seed,
                                   std::vector<double> x, std::vector<double> log_kernel)
    : y_path_(std::move(y_path)),
      n_particles_(n_particles),
      master_seed_(master_seed),
      stride_(y_path_.grid.n_nodes()),
      x_(std::move(x)),
      log_kernel_(std::move(log_kernel)) {
  if (n_particles_ == 0) throw InvalidArgument("ensemble: need at least one particle");
  if (x_.size() != n_particles_ * stride_ || log_kernel_.size() != n_particles_ * stride_) {
    throw InvalidArgument("ensemble: path storage does not match particle count and grid");
  }
}

std::span<const double> ParticleEnsemble::x_path(std::size_t i) const {
  return std::span<const double>(x_).subspan(i * stride_, stride_);
}

std::span<const double> ParticleEnsemble::log_kernel_path(std::size_t i) const {
  return std::span<const double>(log_kernel_).subspan(i * stride_, stride_);
}

std::span<double> ParticleEnsemble::log_kernel_path_mut(std::size_t i) {
  return std::span<double>(log_kernel_).subspan(i * stride_, stride_);
}

SamplePath draw_observation(const TimeGrid& grid, IncrementLaw law, std::uint64_t master_seed, std::uint64_t draw) {
  const auto inc = sample_increments(grid, law, stream_seed(master_seed, kObservationStream + draw));
  return path_from_increments(grid, 0.0, inc);
}

void simulate_particles(const CoefficientSet& coeffs, const MeasurePath& mu_path, const SamplePath& y_path,
                        const SimConfig& cfg, const ParticleSink& sink) {
  const TimeGrid& grid = y_path.grid;
  if (!(mu_path.grid == grid)) throw GridMismatch("simulate: measure path and observation path grids differ");
  if (cfg.n_particles == 0) throw InvalidArgument("simulate: n_particles must be at least 1");
  if (cfg.stratified) {
    if (cfg.increment_law != IncrementLaw::rademacher) {
      throw InvalidArgument("simulate: stratified seeding requires rademacher increments");
    }
    if (grid.n_steps() > 62) throw InvalidArgument("simulate: stratified seeding supports at most 62 steps");
  }

  const std::size_t n = grid.n_steps();
  const double dt = grid.dt();
  const double sd = std::sqrt(dt);
  const std::vector<double> dy = increments_of(y_path);

  // g_i depends on Y only, so it is shared by every particle.
  std::vector<std::vector<double>> g_values(coeffs.h_factors.size(), std::vector<double>(n));
  for (std::size_t f = 0; f < coeffs.h_factors.size(); ++f) {
    for (std::size_t k = 0; k < n; ++k) g_values[f][k] = coeffs.h_factors[f].g(grid.time(k), y_path.prefix(k));
  }

  std::vector<double> x(grid.n_nodes()), log_kernel(grid.n_nodes());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < cfg.n_particles; ++i) {
    Engine engine(stream_seed(cfg.master_seed, i));
    normal.reset();
    x[0] = coeffs.x0;
    log_kernel[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = grid.time(k);
      double db;
      if (cfg.stratified) {
        db = ((i >> k) & 1U) ? sd : -sd;
      } else if (cfg.increment_law == IncrementLaw::gaussian) {
        db = sd * normal(engine);
      } else {
        db = (engine() >> 63) ? sd : -sd;
      }
      const PathArgs args{k, t, std::span<const double>(x).first(k + 1), y_path.prefix(k), &mu_path};
      double h = 0.0;
      for (std::size_t f = 0; f < coeffs.h_factors.size(); ++f) h += coeffs.h_factors[f].f(t, x[k]) * g_values[f][k];
      const double drift = coeffs.drift ? (*coeffs.drift)(args) * dt : 0.0;
      x[k + 1] = x[k] + drift + coeffs.sigma(args) * db;
      log_kernel[k + 1] = log_kernel[k] + h * dy[k] - 0.5 * h * h * dt;
      if (!std::isfinite(x[k + 1]) || !std::isfinite(log_kernel[k + 1]) || std::abs(log_kernel[k + 1]) > 700.0) {
        throw NumericOverflow(fmt::format("simulate: non-finite state for particle {}", i), k);
      }
    }
    sink(i, x, log_kernel);
  }
}

ParticleEnsemble simulate_ensemble(const CoefficientSet& coeffs, const MeasurePath& mu_path,
                                   const SamplePath& y_path, const SimConfig& cfg) {
  const std::size_t stride = y_path.grid.n_nodes();
  std::vector<double> xs(cfg.n_particles * stride), ls(cfg.n_particles * stride);
  simulate_particles(coeffs, mu_path, y_path, cfg,
                     [&](std::size_t i, std::span<const double> x, std::span<const double> l) {
                       std::copy(x.begin(), x.end(), xs.begin() + static_cast<std::ptrdiff_t>(i * stride));
                       std::copy(l.begin(), l.end(), ls.begin() + static_cast<std::ptrdiff_t>(i * stride));
                     });
  return ParticleEnsemble(y_path, cfg.n_particles, cfg.master_seed, std::move(xs), std::move(ls));
}

KernelValues kernel_values(const ParticleEnsemble& ensemble, std::size_t t_node) {
  if (t_node > ensemble.grid().n_steps()) throw InvalidArgument("kernel_values: node out of range");
  KernelValues out;
  out.kernel.resize(ensemble.n_particles());
  out.inverse.resize(ensemble.n_particles());
  for (std::size_t i = 0; i < ensemble.n_particles(); ++i) {
    const double l = ensemble.log_kernel(i, t_node);
    out.kernel[i] = std::exp(l);
    out.inverse[i] = std::exp(-l);
  }
  return out;
}

SamplePath compute_z(const std::function<double(double, std::span<const double>)>& g, const SamplePath& y_path) {
  const TimeGrid& grid = y_path.grid;
  std::vector<double> z(grid.n_nodes(), 0.0);
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    z[k + 1] = z[k] + g(grid.time(k), y_path.prefix(k)) * (y_path[k + 1] - y_path[k]);
  }
  return SamplePath(grid, std::move(z));
}

}  // namespace cmv
