#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmv/grid_path.hpp"
#include "cmv/measures.hpp"

namespace cmv {

/// What a path-dependent coefficient may look at when evaluated at node k.
/// The prefixes end at node k; the measure path must only be read at
/// nodes <= k.
struct PathArgs {
  std::size_t node;
  double t;
  std::span<const double> x_prefix;
  std::span<const double> y_prefix;
  const MeasurePath* mu;

  double x() const { return x_prefix.back(); }
  double y() const { return y_prefix.back(); }
  const DiscreteMeasure& mu_now() const { return (*mu)[node]; }
};

using PathFunctional = std::function<double(const PathArgs&)>;

/// One term f(t, x) * g(t, y_{.^t}) of the observation function.
struct HFactor {
  std::function<double(double t, double x)> f;
  std::function<double(double t, std::span<const double> y_prefix)> g;
  double f_bound;
  double f_dx_bound;
  /// Bound on the second x-derivative; infinity when f has kinks.
  double f_dxx_bound;
  double g_bound;
};

/// Coefficients of the conditional McKean-Vlasov system together with the
/// bounds they declare. The observation function is held in factorized
/// form h = sum_i f_i(t, x) g_i(t, y), so x enters h only through the f_i.
struct CoefficientSet {
  std::string name;
  double x0 = 0.0;
  PathFunctional sigma;
  std::vector<HFactor> h_factors;
  std::optional<PathFunctional> drift;

  double sigma_bound = 1.0;
  double h_bound = 1.0;
  double drift_bound = 0.0;
  double lipschitz = 1.0;
  /// False when sigma and drift ignore the measure argument; the solution
  /// mapping is then constant and a single application is its fixed point.
  bool measure_dependent = false;

  std::size_t n_factors() const noexcept { return h_factors.size(); }
};

/// sum_i f_i(t_k, x) g_i(t_k, y_prefix). y_prefix must hold exactly node + 1 values.
double eval_h(const CoefficientSet& coeffs, const TimeGrid& grid, std::size_t node, double x,
              std::span<const double> y_prefix);

struct ValidationProbe {
  std::string check;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double observed = 0.0;
  double declared = 0.0;
};

struct ValidationReport {
  bool passed = true;
  std::size_t probes = 0;
  double max_sigma = 0.0;
  double max_h = 0.0;
  double max_drift = 0.0;
  double max_lipschitz_ratio = 0.0;
  double max_f_dx = 0.0;
  double max_f_dxx = 0.0;
  std::optional<ValidationProbe> witness;

  /// Throws ValidationFailure describing the witness when the report failed.
  void throw_if_failed() const;
};

/// Randomized probing of the declared bounds: |sigma|, |h|, |b|, the
/// Lipschitz ratio of sigma and b in (sup|x - x'| + sup W1), finite-difference
/// derivatives of each f_i and, when measure_dependent is false, exact
/// invariance of sigma under a change of measure. Probes draw x in
/// [-10, 10], y in [-5, 5] and t in [0, horizon].
ValidationReport validate(const CoefficientSet& coeffs, std::size_t probe_budget, std::uint64_t seed,
                          double horizon = 1.0);

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// Builtin scenarios:
///   "constant"        sigma = s0,                           h = c tanh(x)
///   "meanfield-tanh"  sigma = s0 + s1 tanh(mean(mu_t)),     h = c tanh(x) cos(y_t)
///   "linear-clipped"  sigma = s0,                           h = c clip(x, -R, R)
///   "no-observation"  sigma = s0,                           h = 0
/// Every scenario also reads x0. Throws UnknownScenario or InvalidArgument.
CoefficientSet builtin(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

}  // namespace cmv
