#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmv/conditional_law.hpp"
#include "cmv/fixed_point.hpp"
#include "cmv/reference_sim.hpp"

namespace cmv {

enum class Verdict { pass, fail, degenerate };
std::string to_string(Verdict v);

struct Statistic {
  std::string name;
  /// Node, lag or pair index the statistic refers to.
  std::size_t index = 0;
  double value = 0.0;
  double se = 0.0;
  std::size_t sample_size = 0;
  Verdict verdict = Verdict::pass;
};

struct DiagnosticReport {
  std::string check;
  std::vector<Statistic> stats;
  Verdict verdict = Verdict::pass;
  /// Thresholds and inputs that determined the verdict.
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;

  bool passed() const noexcept { return verdict == Verdict::pass; }
};

/// Particle mean of L at each node, pooled over ensembles. With several
/// ensembles (independent observation draws) the standard error is the
/// cluster-robust one computed from per-ensemble sums; with a single
/// ensemble it is the particle-level one. PASS iff |mean - 1| <= 3 se at
/// every node. Requires at least 100 particles in total.
DiagnosticReport martingale_check(std::span<const ParticleEnsemble> ensembles, std::span<const std::size_t> nodes);
DiagnosticReport martingale_check(const ParticleEnsemble& ensemble, std::span<const std::size_t> nodes);

/// Particle estimate of E[(L*)^4 + (1/L)*^4] summed over the two ensembles,
/// at every node. Requires a shared observation path.
std::vector<double> zeta_path(const ParticleEnsemble& a, const ParticleEnsemble& b);
double zeta_estimate(const ParticleEnsemble& a, const ParticleEnsemble& b, std::size_t t_node);

/// PASS iff zeta <= A at every node; records the max ratio zeta / A.
DiagnosticReport zeta_bound_check(std::span<const double> zeta, const SamplePath& a_path);

/// Ratio W1(mu~_s, mu~'_t) / (zeta_t {sqrt E|X_s - X'_t|^2 + sqrt E|L_s - L'_t|^2})
/// over node pairs (s <= t), computed from two ensembles sharing Y and seeds.
/// PASS iff every ratio is finite and at most `cap`.
DiagnosticReport prop41_ratio_probe(const MeasurePath& mu, const MeasurePath& mu_prime, const TMapContext& ctx,
                                    std::span<const std::pair<std::size_t, std::size_t>> node_pairs,
                                    double cap = 10.0);

struct InnovationOptions {
  std::size_t bootstrap = 200;
  std::uint64_t seed = 0;
  double variance_band = 0.05;
  /// False reproduces the deliberately wrong reference-measure weighting.
  bool use_kernel_weights = true;
};

/// Innovation B2_t = Y_t - Y_0 - sum_{j<k} h(t_j, X_j, Y) dt under the
/// physical measure, estimated with terminal-kernel weights pooled over
/// ensembles (one per observation draw). At each node reports the weighted
/// mean, E[B2^2] - t, the variance and E[(B2_t - B2_s) B2_s] with s = node/2,
/// with bootstrap standard errors over ensembles (over particles when there
/// is only one). PASS iff mean, E[B2^2] - t and the cross moment lie within
/// 3 se of 0 and |Var - t| / t <= variance_band.
DiagnosticReport innovation_check(std::span<const ParticleEnsemble> ensembles, const CoefficientSet& coeffs,
                                  std::span<const std::size_t> nodes, const InnovationOptions& options = {});

struct ContinuityOptions {
  std::vector<std::size_t> lags{1, 2, 4, 8, 16};
  std::size_t replications = 100;
  double tol = 5e-3;
  std::size_t max_iter = 30;
  double slope_threshold = 1.8;
};

/// Log-log regression slope of E[W1(mu~_s, mu~_{s+lag})^4] against the lag,
/// with one fixed point per independent (Y, seed) draw. DEGENERATE when all
/// increments vanish. Throws InsufficientReplications below 30 draws.
DiagnosticReport continuity_exponent(const CoefficientSet& coeffs, const TimeGrid& grid, const SimConfig& sim,
                                     const ContinuityOptions& options = {});

/// Ordinary least squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace cmv
