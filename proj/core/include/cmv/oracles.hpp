#pragma once

#include <cstddef>

#include "cmv/coefficients.hpp"
#include "cmv/grid_path.hpp"
#include "cmv/measures.hpp"

namespace cmv {

inline constexpr std::size_t kMaxTreeSteps = 10;

/// Exhaustive instance of the Rademacher-discretized dynamics: every one of
/// the 2^n_steps B1 paths has probability 2^-n_steps.
struct TreeInstance {
  CoefficientSet coeffs;
  /// Observation path; its grid is the instance grid.
  SamplePath y_path;
};

/// Exact conditional-law path of the discrete scheme by depth-first
/// enumeration of the binary tree. Uses the same update rules as the
/// particle simulator. Throws TreeTooLarge beyond kMaxTreeSteps.
MeasurePath tree_apply_t(const TreeInstance& instance, const MeasurePath& mu_path);

/// Picard iteration of tree_apply_t from the constant Dirac path at x0.
/// Returns once successive exact iterates are within tol in sup-W1.
MeasurePath tree_fixed_point(const TreeInstance& instance, double tol, std::size_t max_iter);

/// dX = sigma dB1, dY = c X dt + dB2, X_0 ~ N(x0, p0).
struct KalmanSpec {
  double sigma0 = 1.0;
  double c = 1.0;
  double x0 = 0.0;
  double p0 = 0.0;
};

struct KalmanPosterior {
  SamplePath mean;
  SamplePath variance;
};

/// Euler recursion of the Kalman-Bucy filter:
///   P' = P + (sigma^2 - c^2 P^2) dt,   m' = m + c P (dY - c m dt).
KalmanPosterior kalman_posterior(const KalmanSpec& spec, const SamplePath& y_path);

/// Midpoint Riemann sum of |F_mu - F_nu| over `resolution` cells spanning
/// the joint support.
double cdf_integral_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::size_t resolution);

}  // namespace cmv
