#include "cmv/grid_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmv/errors.hpp"
#include "cmv/rng.hpp"

namespace cmv {

TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), n_steps_(n_steps), dt_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("time grid: horizon must be positive and finite");
  }
  if (n_steps == 0) {
    throw InvalidArgument("time grid: n_steps must be at least 1");
  }
  dt_ = horizon / static_cast<double>(n_steps);
}

TimeGrid make_grid(double horizon, std::size_t n_steps) { return TimeGrid(horizon, n_steps); }

SamplePath::SamplePath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.n_nodes()) {
    throw InvalidArgument("sample path: expected " + std::to_string(grid.n_nodes()) +
                          " values, got " + std::to_string(values.size()));
  }
}

SamplePath::SamplePath(TimeGrid g, double value) : grid(g), values(g.n_nodes(), value) {}

std::span<const double> SamplePath::prefix(std::size_t node) const {
  if (node > grid.n_steps()) {
    throw InvalidArgument("sample path: prefix node out of range");
  }
  return std::span<const double>(values).first(node + 1);
}

IncrementLaw parse_increment_law(std::string_view name) {
  if (name == "gaussian") return IncrementLaw::gaussian;
  if (name == "rademacher") return IncrementLaw::rademacher;
  throw InvalidArgument("unknown increment law '" + std::string(name) + "'");
}

std::string_view to_string(IncrementLaw law) {
  return law == IncrementLaw::gaussian ? "gaussian" : "rademacher";
}

std::vector<double> sample_increments(const TimeGrid& grid, IncrementLaw law, std::uint64_t seed) {
  Engine engine(seed);
  const double sd = std::sqrt(grid.dt());
  std::vector<double> out(grid.n_steps());
  if (law == IncrementLaw::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out) v = sd * normal(engine);
  } else {
    for (auto& v : out) v = (engine() >> 63) ? sd : -sd;
  }
  return out;
}

SamplePath path_from_increments(const TimeGrid& grid, double x0, std::span<const double> increments) {
  if (increments.size() != grid.n_steps()) {
    throw InvalidArgument("path_from_increments: increment count does not match grid");
  }
  std::vector<double> values(grid.n_nodes());
  values[0] = x0;
  for (std::size_t k = 0; k < increments.size(); ++k) values[k + 1] = values[k] + increments[k];
  return SamplePath(grid, std::move(values));
}

std::vector<double> increments_of(const SamplePath& path) {
  std::vector<double> out(path.grid.n_steps());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = path.values[k + 1] - path.values[k];
  return out;
}

double running_sup(const SamplePath& path, std::size_t t_node) {
  if (t_node > path.grid.n_steps()) {
    throw InvalidArgument("running_sup: node index out of range");
  }
  double m = 0.0;
  for (std::size_t k = 0; k <= t_node; ++k) m = std::max(m, std::abs(path.values[k]));
  return m;
}

SamplePath running_sup_path(const SamplePath& path) {
  std::vector<double> out(path.values.size());
  double m = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    m = std::max(m, std::abs(path.values[k]));
    out[k] = m;
  }
  return SamplePath(path.grid, std::move(out));
}

}  // namespace cmv
