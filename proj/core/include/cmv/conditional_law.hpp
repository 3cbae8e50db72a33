#pragma once

#include <cstddef>
#include <vector>

#include "cmv/coefficients.hpp"
#include "cmv/measures.hpp"
#include "cmv/reference_sim.hpp"

namespace cmv {

/// Everything the solution mapping holds fixed: coefficients, the
/// observation path and the particle seeds.
struct TMapContext {
  CoefficientSet coeffs;
  SamplePath y_path;
  SimConfig sim;

  const TimeGrid& grid() const noexcept { return y_path.grid; }
};

/// Kallianpur-Striebel particle law: atoms X_t^i with weights L_t^i / sum_j L_t^j.
DiscreteMeasure ks_law_at(const ParticleEnsemble& ensemble, std::size_t t_node);

/// Same law from raw particle positions and log kernels.
DiscreteMeasure ks_law(std::span<const double> x, std::span<const double> log_kernel);

/// 1 / sum_i w_i^2 for the normalized kernel weights at a node.
double effective_sample_size(const ParticleEnsemble& ensemble, std::size_t t_node);

/// The solution mapping: simulate the decoupled system driven by mu_path and
/// return the conditional law path. Node 0 is exactly the Dirac mass at x0.
MeasurePath apply_t(const TMapContext& ctx, const MeasurePath& mu_path);

/// Localized mapping: nodes up to tau_node agree with apply_t, later nodes
/// repeat the node-tau_node law (kernel and law frozen at the stopping node).
MeasurePath apply_t_localized(const TMapContext& ctx, const MeasurePath& mu_path, std::size_t tau_node);

}  // namespace cmv
