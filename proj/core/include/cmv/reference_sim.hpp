#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cmv/coefficients.hpp"
#include "cmv/grid_path.hpp"
#include "cmv/measures.hpp"

namespace cmv {

struct SimConfig {
  std::size_t n_particles = 1000;
  IncrementLaw increment_law = IncrementLaw::gaussian;
  std::uint64_t master_seed = 0;
  /// Rademacher only: particle i follows the B1 path whose step-k sign is
  /// bit k of i, so 2^n_steps particles enumerate every path exactly once.
  bool stratified = false;
};

/// Particles simulated under the reference measure, all sharing one
/// observation path. Paths are stored particle-major.
class ParticleEnsemble {
 public:
  ParticleEnsemble(SamplePath y_path, std::size_t n_particles, std::uint64_t master_seed,
                   std::vector<double> x, std::vector<double> log_kernel);

  const TimeGrid& grid() const noexcept { return y_path_.grid; }
  const SamplePath& y_path() const noexcept { return y_path_; }
  std::size_t n_particles() const noexcept { return n_particles_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::span<const double> x_path(std::size_t i) const;
  std::span<const double> log_kernel_path(std::size_t i) const;
  double x(std::size_t i, std::size_t node) const { return x_[i * stride_ + node]; }
  double log_kernel(std::size_t i, std::size_t node) const { return log_kernel_[i * stride_ + node]; }

  /// Mutable access for tests that construct deliberately broken kernels.
  std::span<double> log_kernel_path_mut(std::size_t i);

 private:
  SamplePath y_path_;
  std::size_t n_particles_;
  std::uint64_t master_seed_;
  std::size_t stride_;
  std::vector<double> x_;
  std::vector<double> log_kernel_;
};

/// Observation path drawn under the reference measure (a Brownian motion
/// started at 0), keyed by (master_seed, draw).
SamplePath draw_observation(const TimeGrid& grid, IncrementLaw law, std::uint64_t master_seed,
                            std::uint64_t draw = 0);

/// Receives particle i's complete X and log-kernel paths.
using ParticleSink = std::function<void(std::size_t i, std::span<const double> x, std::span<const double> log_kernel)>;

/// Euler scheme for X and the exponential form of the kernel:
///   X_{k+1}    = X_k + b dt + sigma dB1_k
///   logL_{k+1} = logL_k + h_k dY_k - h_k^2 dt / 2,   h_k = h(t_k, X_k, Y_{.^t_k})
/// Particles are visited in index order; each uses its own RNG stream.
/// Throws GridMismatch, NumericOverflow.
void simulate_particles(const CoefficientSet& coeffs, const MeasurePath& mu_path, const SamplePath& y_path,
                        const SimConfig& cfg, const ParticleSink& sink);

ParticleEnsemble simulate_ensemble(const CoefficientSet& coeffs, const MeasurePath& mu_path,
                                   const SamplePath& y_path, const SimConfig& cfg);

struct KernelValues {
  std::vector<double> kernel;
  std::vector<double> inverse;
};

/// L_i and 1/L_i at a node, both computed from the log kernel.
KernelValues kernel_values(const ParticleEnsemble& ensemble, std::size_t t_node);

/// Z_{k+1} = Z_k + g(t_k, Y_{.^t_k}) dY_k with Z_0 = 0.
SamplePath compute_z(const std::function<double(double, std::span<const double>)>& g, const SamplePath& y_path);

}  // namespace cmv
