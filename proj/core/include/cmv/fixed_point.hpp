#pragma once

#include <cstddef>
#include <vector>

#include "cmv/conditional_law.hpp"
#include "cmv/grid_path.hpp"
#include "cmv/measures.hpp"

namespace cmv {

/// Monitor A_t = c1 exp(c2 (Z*_t)^2) and the threshold ladder N_1 < N_2 < ...
struct LocalizationConfig {
  double c1 = 4.0;
  double c2 = 1.0;
  std::vector<double> thresholds{1e2, 1e4, 1e8, 1e16, 1e64, 1e256};

  /// Throws InvalidArgument unless c1, c2 > 0, thresholds strictly
  /// increasing and the smallest threshold exceeds c1.
  void check() const;
};

/// Upper bound for the kernel moment process derived from the declared
/// coefficient bounds. Writing h = sum f_i g_i and integrating by parts,
/// |int h dY| <= a Z* + |int Z f' sigma dB1| with
///   a = sum_i (|f_i| + |f_i'| |b| T + |f_i''| |sigma|^2 T / 2),  b = sum_i |f_i'| |sigma|,
/// and Doob's inequality on the Gaussian stochastic integral gives
///   c1 = 16 e (1 + exp(2 M_h^2 T)),  c2 = 4 a^2 + 8 b^2 T.
/// When h vanishes identically the kernel is 1 and c1 = 4. Factors with an
/// infinite second-derivative bound (kinks) contribute no f'' term; the
/// local-time correction at the kink is neglected. Thresholds are
/// c1 * exp(2^j), j = 0..9.
LocalizationConfig calibrated_localization(const CoefficientSet& coeffs, double horizon);

/// A_t = c1 exp(c2 running_sup(Z, t)^2). Throws NumericOverflow when A is not finite.
SamplePath a_process(const SamplePath& z_path, const LocalizationConfig& loc);

/// Pointwise max of |Z_i| across the h factors' Z processes; its running
/// sup is the largest factor-wise running sup.
SamplePath z_envelope(const CoefficientSet& coeffs, const SamplePath& y_path);

/// First node with A > threshold, else n_steps.
std::size_t tau_node(const SamplePath& a_path, double threshold);

struct LevelResult {
  MeasurePath path;
  std::size_t iterations = 0;
  std::vector<double> distances;
};

/// Picard iteration of the localized mapping on [0, tau]; the distance
/// between iterates is the sup-W1 up to tau. Returns the first iterate
/// within tol of its predecessor; throws NonConvergence (with the distance
/// trace) after max_iter. When the coefficients are measure-independent the
/// mapping is constant, so the first image is returned with distance 0.
LevelResult solve_level(const TMapContext& ctx, const MeasurePath& mu0, std::size_t tau, double tol,
                        std::size_t max_iter);

struct FixedPointReport {
  std::vector<double> distances;
  /// Level index of each entry in `distances`.
  std::vector<std::size_t> distance_level;
  std::vector<double> thresholds_used;
  std::vector<std::size_t> tau_ladder;
  std::vector<std::size_t> iterations_per_level;
  std::vector<MeasurePath> level_paths;
  bool converged = false;
  MeasurePath final_path;
  std::vector<double> contraction_ratios;
  LocalizationConfig localization;
  double tol = 0.0;
  std::size_t max_iter = 0;
};

/// Localized fixed point: for each threshold solve on [0, tau_N] seeded with
/// the previous level's result, then patch the levels together. Stops when
/// tau reaches n_steps; throws LevelExhaustion if it never does.
FixedPointReport solve(const TMapContext& ctx, const MeasurePath& mu0, const LocalizationConfig& loc, double tol,
                       std::size_t max_iter);

struct UniquenessResult {
  FixedPointReport a;
  FixedPointReport b;
  double discrepancy = 0.0;
  bool passed = false;
};

/// Two solves from different initial iterates with shared Y and seeds.
/// Passes iff the final sup-W1 discrepancy is at most 2 tol.
UniquenessResult uniqueness_probe(const TMapContext& ctx, const MeasurePath& mu0_a, const MeasurePath& mu0_b,
                                  const LocalizationConfig& loc, double tol, std::size_t max_iter = 50);

/// True when, after its largest entry, the trace never increases and ends
/// strictly below that entry (or the trace is a single zero).
bool eventually_decreasing(const std::vector<double>& trace);

}  // namespace cmv
