#include "cmv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cmv/errors.hpp"
#include "cmv/rng.hpp"

namespace cmv {

DiscreteMeasure DiscreteMeasure::dirac(double x) {
  const double one = 1.0;
  return normalize(std::span<const double>(&x, 1), std::span<const double>(&one, 1));
}

DiscreteMeasure normalize(std::span<const double> atoms, std::span<const double> weights) {
  if (atoms.size() != weights.size()) {
    throw InvalidArgument("normalize: atoms and weights differ in length");
  }
  std::vector<std::size_t> order;
  order.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw InvalidArgument("normalize: non-finite atom");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw InvalidArgument("normalize: weights must be finite and nonnegative");
    }
    if (weights[i] > 0.0) order.push_back(i);
  }
  if (order.empty()) throw DegenerateMeasure("normalize: all weights are zero");

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return atoms[a] < atoms[b] || (atoms[a] == atoms[b] && a < b);
  });

  auto data = std::make_shared<DiscreteMeasure::Data>();
  data->atoms.reserve(order.size());
  data->weights.reserve(order.size());
  for (std::size_t idx : order) {
    if (!data->atoms.empty() && data->atoms.back() == atoms[idx]) {
      data->weights.back() += weights[idx];
    } else {
      data->atoms.push_back(atoms[idx]);
      data->weights.push_back(weights[idx]);
    }
  }
  double total = 0.0;
  for (double w : data->weights) total += w;
  double m = 0.0;
  for (std::size_t i = 0; i < data->weights.size(); ++i) {
    data->weights[i] /= total;
    m += data->weights[i] * data->atoms[i];
  }
  data->mean = m;
  return DiscreteMeasure(std::move(data));
}

DiscreteMeasure DiscreteMeasure::from_canonical(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw InvalidArgument("from_canonical: atoms and weights must be nonempty and of equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || !(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw InvalidArgument("from_canonical: non-finite atom or non-positive weight");
    }
    if (i && !(atoms[i - 1] < atoms[i])) throw InvalidArgument("from_canonical: atoms not strictly increasing");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("from_canonical: weights do not sum to 1");
  auto data = std::make_shared<Data>();
  data->mean = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) data->mean += weights[i] * atoms[i];
  data->atoms = std::move(atoms);
  data->weights = std::move(weights);
  return DiscreteMeasure(std::move(data));
}

DiscreteMeasure empirical(std::span<const double> atoms) {
  std::vector<double> w(atoms.size(), 1.0);
  return normalize(atoms, w);
}

double exact_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const auto a = mu.atoms();
  const auto wa = mu.weights();
  const auto b = nu.atoms();
  const auto wb = nu.weights();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double cur = std::min(a[0], b[0]);
  while (i < a.size() || j < b.size()) {
    const double next = std::min(i < a.size() ? a[i] : inf, j < b.size() ? b[j] : inf);
    total += std::abs(fa - fb) * (next - cur);
    cur = next;
    while (i < a.size() && a[i] == next) fa += wa[i++];
    while (j < b.size() && b[j] == next) fb += wb[j++];
  }
  return total;
}

double mean(const DiscreteMeasure& mu) { return mu.mean(); }

double variance(const DiscreteMeasure& mu) {
  const double m = mu.mean();
  double v = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = mu.atoms()[i] - m;
    v += mu.weights()[i] * d * d;
  }
  return v;
}

double quantile(const DiscreteMeasure& mu, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile: q must lie in [0, 1]");
  double cdf = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    cdf += mu.weights()[i];
    if (cdf >= q) return mu.atoms()[i];
  }
  return mu.atoms().back();
}

MeasurePath::MeasurePath(TimeGrid g, std::vector<DiscreteMeasure> m)
    : grid(g), measures(std::move(m)) {
  if (measures.size() != grid.n_nodes()) {
    throw InvalidArgument("measure path: expected one measure per grid node");
  }
}

const DiscreteMeasure& MeasurePath::at(std::size_t node) const {
  if (node >= measures.size()) throw InvalidArgument("measure path: node out of range");
  return measures[node];
}

MeasurePath constant_path(const TimeGrid& grid, const DiscreteMeasure& mu) {
  return MeasurePath(grid, std::vector<DiscreteMeasure>(grid.n_nodes(), mu));
}

MeasurePath freeze_after(const MeasurePath& path, std::size_t node) {
  if (node > path.grid.n_steps()) throw InvalidArgument("freeze_after: node out of range");
  MeasurePath out = path;
  for (std::size_t k = node + 1; k < out.measures.size(); ++k) out.measures[k] = path.measures[node];
  return out;
}

double sup_w1_path(const MeasurePath& a, const MeasurePath& b, std::size_t up_to_node) {
  if (!(a.grid == b.grid)) throw GridMismatch("sup_w1_path: measure paths live on different grids");
  if (up_to_node > a.grid.n_steps()) throw InvalidArgument("sup_w1_path: node out of range");
  double sup = 0.0;
  for (std::size_t k = 0; k <= up_to_node; ++k) sup = std::max(sup, exact_w1(a[k], b[k]));
  return sup;
}

std::vector<double> nodewise_w1(const MeasurePath& a, const MeasurePath& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("nodewise_w1: measure paths live on different grids");
  std::vector<double> out(a.measures.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = exact_w1(a[k], b[k]);
  return out;
}

double PiecewiseLinear::operator()(double x) const {
  // Integrate the slope from 0 to x piece by piece.
  auto piece_of = [&](double v) {
    return static_cast<std::size_t>(std::upper_bound(breakpoints.begin(), breakpoints.end(), v) -
                                    breakpoints.begin());
  };
  double lo = std::min(0.0, x), hi = std::max(0.0, x);
  double acc = 0.0;
  double cur = lo;
  for (std::size_t p = piece_of(lo); cur < hi; ++p) {
    const double end = p < breakpoints.size() ? std::min(breakpoints[p], hi) : hi;
    acc += slopes[p] * (end - cur);
    cur = end;
  }
  return value_at_zero + (x >= 0.0 ? acc : -acc);
}

LipschitzTestFunction::LipschitzTestFunction(std::vector<double> breakpoints, std::vector<double> slopes)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (slopes_.size() != breakpoints_.size() + 1) {
    throw InvalidArgument("test function: need one slope per piece");
  }
  for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
    if (!std::isfinite(breakpoints_[j]) || (j > 0 && !(breakpoints_[j - 1] < breakpoints_[j]))) {
      throw InvalidArgument("test function: breakpoints must be finite and strictly increasing");
    }
  }
  for (double s : slopes_) {
    if (!(std::abs(s) <= 1.0)) throw InvalidArgument("test function: slope outside [-1, 1]");
  }
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), 0.0);
  const auto z = static_cast<std::size_t>(it - breakpoints_.begin());
  if (it == breakpoints_.end() || *it != 0.0) {
    breakpoints_.insert(it, 0.0);
    slopes_.insert(slopes_.begin() + static_cast<std::ptrdiff_t>(z), slopes_[z]);
  }
  knot_values_.assign(breakpoints_.size(), 0.0);
  for (std::size_t j = z + 1; j < breakpoints_.size(); ++j) {
    knot_values_[j] = knot_values_[j - 1] + slopes_[j] * (breakpoints_[j] - breakpoints_[j - 1]);
  }
  for (std::size_t j = z; j-- > 0;) {
    knot_values_[j] = knot_values_[j + 1] - slopes_[j + 1] * (breakpoints_[j + 1] - breakpoints_[j]);
  }
}

LipschitzTestFunction LipschitzTestFunction::identity() { return LipschitzTestFunction({0.0}, {1.0, 1.0}); }

double LipschitzTestFunction::operator()(double x) const {
  const auto p = static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
  if (p == 0) return knot_values_[0] + slopes_[0] * (x - breakpoints_[0]);
  return knot_values_[p - 1] + slopes_[p] * (x - breakpoints_[p - 1]);
}

double LipschitzTestFunction::integrate(const DiscreteMeasure& mu) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) acc += mu.weights()[i] * (*this)(mu.atoms()[i]);
  return acc;
}

LipschitzTestFunction clip_to_lip1(const PiecewiseLinear& f) {
  std::vector<double> slopes(f.slopes.size());
  std::transform(f.slopes.begin(), f.slopes.end(), slopes.begin(),
                 [](double s) { return std::clamp(s, -1.0, 1.0); });
  return LipschitzTestFunction(f.breakpoints, std::move(slopes));
}

double kr_dual_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  std::span<const LipschitzTestFunction> family) {
  if (family.empty()) throw InvalidArgument("kr_dual_w1: empty test family");
  double best = 0.0;
  for (const auto& phi : family) {
    best = std::max(best, std::abs(phi.integrate(mu) - phi.integrate(nu)));
  }
  return best;
}

std::vector<LipschitzTestFunction> lattice_family(std::span<const double> breakpoints,
                                                  std::size_t random_members, std::uint64_t seed) {
  std::vector<double> lattice(breakpoints.begin(), breakpoints.end());
  std::sort(lattice.begin(), lattice.end());
  lattice.erase(std::unique(lattice.begin(), lattice.end()), lattice.end());

  std::vector<LipschitzTestFunction> family;
  family.push_back(LipschitzTestFunction::identity());
  family.push_back(LipschitzTestFunction({0.0}, {-1.0, -1.0}));
  for (double b : lattice) {
    family.push_back(LipschitzTestFunction({b}, {-1.0, 1.0}));
    family.push_back(LipschitzTestFunction({b}, {1.0, -1.0}));
  }
  Engine engine(seed);
  std::uniform_real_distribution<double> slope(-1.0, 1.0);
  for (std::size_t r = 0; r < random_members; ++r) {
    std::vector<double> s(lattice.size() + 1);
    for (auto& v : s) v = slope(engine);
    family.emplace_back(lattice, std::move(s));
  }
  return family;
}

std::vector<LipschitzTestFunction> atom_breakpoint_family(const DiscreteMeasure& mu,
                                                          const DiscreteMeasure& nu) {
  std::vector<double> merged;
  merged.reserve(mu.size() + nu.size());
  std::merge(mu.atoms().begin(), mu.atoms().end(), nu.atoms().begin(), nu.atoms().end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  constexpr double steep = 1e20;
  PiecewiseLinear f;
  f.breakpoints = merged;
  f.slopes.assign(merged.size() + 1, 0.0);
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  for (std::size_t p = 0; p < merged.size(); ++p) {
    while (i < mu.size() && mu.atoms()[i] == merged[p]) fa += mu.weights()[i++];
    while (j < nu.size() && nu.atoms()[j] == merged[p]) fb += nu.weights()[j++];
    if (p + 1 < merged.size()) f.slopes[p + 1] = steep * (fb - fa);
  }
  auto family = lattice_family(merged);
  family.insert(family.begin(), clip_to_lip1(f));
  return family;
}

}  // namespace cmv
