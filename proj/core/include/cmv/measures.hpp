#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cmv/grid_path.hpp"

namespace cmv {

/// Finitely supported probability measure on the real line.
///
/// Atoms are strictly increasing and weights strictly positive with unit
/// sum. Atoms that compare equal are merged on construction; nearby but
/// distinct atoms are kept apart. The mean is cached since coefficient
/// functionals query it once per particle step.
class DiscreteMeasure {
 public:
  static DiscreteMeasure dirac(double x);
  /// Takes atoms and weights already in canonical form (strictly increasing
  /// atoms, positive weights summing to 1 within 1e-12) without rescaling,
  /// so serialized measures read back bit-identically.
  static DiscreteMeasure from_canonical(std::vector<double> atoms, std::vector<double> weights);

  std::span<const double> atoms() const noexcept { return data_->atoms; }
  std::span<const double> weights() const noexcept { return data_->weights; }
  std::size_t size() const noexcept { return data_->atoms.size(); }
  double mean() const noexcept { return data_->mean; }

  bool operator==(const DiscreteMeasure& o) const {
    return data_ == o.data_ || (data_->atoms == o.data_->atoms && data_->weights == o.data_->weights);
  }

 private:
  struct Data {
    std::vector<double> atoms;
    std::vector<double> weights;
    double mean = 0.0;
  };
  explicit DiscreteMeasure(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  friend DiscreteMeasure normalize(std::span<const double>, std::span<const double>);

  // Immutable and shared: copies of measures and measure paths are cheap.
  std::shared_ptr<const Data> data_;
};

/// Sorts atoms, merges exact duplicates and divides by the total weight.
/// Throws DegenerateMeasure when no weight is strictly positive and
/// InvalidArgument on negative or non-finite input.
DiscreteMeasure normalize(std::span<const double> atoms, std::span<const double> weights);

/// Unweighted empirical measure.
DiscreteMeasure empirical(std::span<const double> atoms);

/// W1 via the closed form: integral of |F_mu - F_nu| over the merged support.
double exact_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

double mean(const DiscreteMeasure& mu);
double variance(const DiscreteMeasure& mu);
/// Generalized inverse CDF, inf{x : F(x) >= q}. Throws for q outside [0, 1].
double quantile(const DiscreteMeasure& mu, double q);

/// One measure per grid node, read as right-continuous and piecewise
/// constant between nodes.
struct MeasurePath {
  TimeGrid grid;
  std::vector<DiscreteMeasure> measures;

  MeasurePath(TimeGrid g, std::vector<DiscreteMeasure> m);

  const DiscreteMeasure& operator[](std::size_t node) const { return measures[node]; }
  const DiscreteMeasure& at(std::size_t node) const;
};

MeasurePath constant_path(const TimeGrid& grid, const DiscreteMeasure& mu);

/// Copy of `path` with every node after `node` replaced by the node-`node` measure.
MeasurePath freeze_after(const MeasurePath& path, std::size_t node);

/// max over nodes 0..up_to_node of exact_w1. Throws GridMismatch.
double sup_w1_path(const MeasurePath& a, const MeasurePath& b, std::size_t up_to_node);

/// exact_w1 at every node.
std::vector<double> nodewise_w1(const MeasurePath& a, const MeasurePath& b);

/// Piecewise-linear function given by its value at 0 and per-piece slopes.
/// Piece 0 is (-inf, b_0), piece j is (b_{j-1}, b_j), the last is (b_m, inf),
/// so slopes.size() == breakpoints.size() + 1.
struct PiecewiseLinear {
  std::vector<double> breakpoints;
  std::vector<double> slopes;
  double value_at_zero = 0.0;

  double operator()(double x) const;
};

/// Piecewise-linear test function with phi(0) = 0 and |slope| <= 1.
class LipschitzTestFunction {
 public:
  /// Validates the shape; 0 is inserted as a breakpoint when missing.
  LipschitzTestFunction(std::vector<double> breakpoints, std::vector<double> slopes);

  static LipschitzTestFunction identity();

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> slopes() const noexcept { return slopes_; }

  double operator()(double x) const;
  /// Integral against mu.
  double integrate(const DiscreteMeasure& mu) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<double> knot_values_;
};

/// phi_f(x) = integral from 0 to x of the derivative of f clipped to [-1, 1].
/// The output vanishes at 0, so f(0) is dropped.
LipschitzTestFunction clip_to_lip1(const PiecewiseLinear& f);

/// max over the family of |int phi dmu - int phi dnu|. Throws on an empty family.
double kr_dual_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  std::span<const LipschitzTestFunction> family);

/// Finite family on a breakpoint lattice: +-x and, for every breakpoint b,
/// the V-shaped +-|x - b| recentred at 0, plus `random_members` functions with
/// slopes drawn uniformly from [-1, 1] on each lattice piece.
std::vector<LipschitzTestFunction> lattice_family(std::span<const double> breakpoints,
                                                  std::size_t random_members = 0,
                                                  std::uint64_t seed = 0);

/// Family whose breakpoints are the merged atoms of mu and nu. Its member
/// is clip_to_lip1 of a steep function following F_nu - F_mu, which is the
/// optimal Kantorovich potential in one dimension; lattice members follow.
std::vector<LipschitzTestFunction> atom_breakpoint_family(const DiscreteMeasure& mu,
                                                          const DiscreteMeasure& nu);

}  // namespace cmv
