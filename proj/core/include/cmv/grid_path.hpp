#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cmv {

/// Uniform discretization of [0, T] into n_steps intervals.
class TimeGrid {
 public:
  /// Throws InvalidArgument unless horizon > 0 and n_steps >= 1.
  TimeGrid(double horizon, std::size_t n_steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t node) const noexcept { return static_cast<double>(node) * dt_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  std::size_t n_steps_;
  double dt_;
};

TimeGrid make_grid(double horizon, std::size_t n_steps);

/// Real-valued path sampled at every node of a grid.
struct SamplePath {
  TimeGrid grid;
  std::vector<double> values;

  SamplePath(TimeGrid g, std::vector<double> v);
  /// Constant path.
  SamplePath(TimeGrid g, double value);

  double operator[](std::size_t node) const { return values[node]; }
  /// Values at nodes 0..node inclusive.
  std::span<const double> prefix(std::size_t node) const;
};

enum class IncrementLaw { gaussian, rademacher };

IncrementLaw parse_increment_law(std::string_view name);
std::string_view to_string(IncrementLaw law);

/// n_steps i.i.d. increments with mean 0 and variance dt. Gaussian draws are
/// N(0, dt); rademacher draws are +-sqrt(dt) with equal probability.
std::vector<double> sample_increments(const TimeGrid& grid, IncrementLaw law, std::uint64_t seed);

/// Cumulative sum starting at x0.
SamplePath path_from_increments(const TimeGrid& grid, double x0, std::span<const double> increments);

/// Forward differences; inverse of path_from_increments.
std::vector<double> increments_of(const SamplePath& path);

/// max_{k <= t_node} |values[k]|.
double running_sup(const SamplePath& path, std::size_t t_node);

/// Path of running_sup at every node.
SamplePath running_sup_path(const SamplePath& path);

}  // namespace cmv
