#include "cmv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "cmv/errors.hpp"
#include "cmv/rng.hpp"

namespace cmv {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    case Verdict::degenerate:
      return "DEGENERATE";
  }
  return "FAIL";
}

namespace {

Verdict combine(const std::vector<Statistic>& stats) {
  for (const auto& s : stats) {
    if (s.verdict != Verdict::pass) return Verdict::fail;
  }
  return Verdict::pass;
}

void require_nodes(const TimeGrid& grid, std::span<const std::size_t> nodes, const char* who) {
  for (std::size_t k : nodes) {
    if (k > grid.n_steps()) throw InvalidArgument(fmt::format("{}: node {} out of range", who, k));
  }
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

DiagnosticReport martingale_check(std::span<const ParticleEnsemble> ensembles, std::span<const std::size_t> nodes) {
  std::size_t total = 0;
  for (const auto& e : ensembles) {
    require_nodes(e.grid(), nodes, "martingale_check");
    total += e.n_particles();
  }
  if (total < 100) throw InvalidArgument("martingale_check: need at least 100 particles");

  DiagnosticReport report{.check = "martingale"};
  report.config = {{"threshold_se", 3.0}, {"ensembles", ensembles.size()}, {"particles", total}};
  report.seed = ensembles.front().master_seed();
  const double n = static_cast<double>(total);
  for (std::size_t node : nodes) {
    std::vector<double> sums;
    std::vector<double> counts;
    std::vector<double> all;
    for (const auto& e : ensembles) {
      double s = 0.0;
      for (std::size_t i = 0; i < e.n_particles(); ++i) {
        const double l = std::exp(e.log_kernel(i, node));
        s += l;
        if (ensembles.size() == 1) all.push_back(l);
      }
      sums.push_back(s);
      counts.push_back(static_cast<double>(e.n_particles()));
    }
    const double m = std::accumulate(sums.begin(), sums.end(), 0.0) / n;
    double se = 0.0;
    if (ensembles.size() >= 2) {
      double ss = 0.0;
      for (std::size_t r = 0; r < sums.size(); ++r) ss += (sums[r] - m * counts[r]) * (sums[r] - m * counts[r]);
      const double r = static_cast<double>(sums.size());
      se = std::sqrt(ss * r / (r - 1.0)) / n;
    } else {
      se = sample_sd(all) / std::sqrt(n);
    }
    const Verdict v = std::abs(m - 1.0) <= 3.0 * se ? Verdict::pass : Verdict::fail;
    report.stats.push_back(Statistic{"mean_L", node, m, se, total, v});
  }
  report.verdict = combine(report.stats);
  return report;
}

DiagnosticReport martingale_check(const ParticleEnsemble& ensemble, std::span<const std::size_t> nodes) {
  return martingale_check(std::span<const ParticleEnsemble>(&ensemble, 1), nodes);
}

std::vector<double> zeta_path(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (!(a.grid() == b.grid()) || a.y_path().values != b.y_path().values) {
    throw InvalidArgument("zeta: ensembles do not share an observation path");
  }
  const std::size_t nodes = a.grid().n_nodes();
  std::vector<double> zeta(nodes, 0.0);
  for (const ParticleEnsemble* e : {&a, &b}) {
    std::vector<double> acc(nodes, 0.0);
    for (std::size_t i = 0; i < e->n_particles(); ++i) {
      double hi = 0.0, lo = 0.0;
      const auto l = e->log_kernel_path(i);
      for (std::size_t k = 0; k < nodes; ++k) {
        hi = std::max(hi, l[k]);
        lo = std::min(lo, l[k]);
        acc[k] += std::exp(4.0 * hi) + std::exp(-4.0 * lo);
      }
    }
    const double n = static_cast<double>(e->n_particles());
    for (std::size_t k = 0; k < nodes; ++k) zeta[k] += acc[k] / n;
  }
  return zeta;
}

double zeta_estimate(const ParticleEnsemble& a, const ParticleEnsemble& b, std::size_t t_node) {
  if (t_node > a.grid().n_steps()) throw InvalidArgument("zeta_estimate: node out of range");
  return zeta_path(a, b)[t_node];
}

DiagnosticReport zeta_bound_check(std::span<const double> zeta, const SamplePath& a_path) {
  if (zeta.size() != a_path.values.size()) throw GridMismatch("zeta_bound_check: zeta and A are not aligned");
  DiagnosticReport report{.check = "zeta_bound"};
  double worst = 0.0;
  std::size_t worst_node = 0;
  bool ok = true;
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    const double ratio = zeta[k] / a_path[k];
    if (ratio > worst) {
      worst = ratio;
      worst_node = k;
    }
    ok = ok && zeta[k] <= a_path[k];
  }
  report.stats.push_back(Statistic{"max_zeta_over_A", worst_node, worst, 0.0, zeta.size(),
                                   ok ? Verdict::pass : Verdict::fail});
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  return report;
}

DiagnosticReport prop41_ratio_probe(const MeasurePath& mu, const MeasurePath& mu_prime, const TMapContext& ctx,
                                    std::span<const std::pair<std::size_t, std::size_t>> node_pairs, double cap) {
  const ParticleEnsemble e = simulate_ensemble(ctx.coeffs, mu, ctx.y_path, ctx.sim);
  const ParticleEnsemble f = simulate_ensemble(ctx.coeffs, mu_prime, ctx.y_path, ctx.sim);
  const std::vector<double> zeta = zeta_path(e, f);
  const double n = static_cast<double>(e.n_particles());

  DiagnosticReport report{.check = "prop41_ratio"};
  report.config = {{"cap", cap}, {"particles", e.n_particles()}};
  report.seed = ctx.sim.master_seed;
  for (std::size_t p = 0; p < node_pairs.size(); ++p) {
    const auto [s, t] = node_pairs[p];
    if (s > t || t > ctx.grid().n_steps()) throw InvalidArgument("prop41_ratio_probe: need s <= t <= n_steps");
    const double lhs = exact_w1(ks_law_at(e, s), ks_law_at(f, t));
    double dx = 0.0, dl = 0.0;
    for (std::size_t i = 0; i < e.n_particles(); ++i) {
      const double ex = e.x(i, s) - f.x(i, t);
      const double el = std::exp(e.log_kernel(i, s)) - std::exp(f.log_kernel(i, t));
      dx += ex * ex;
      dl += el * el;
    }
    const double rhs = zeta[t] * (std::sqrt(dx / n) + std::sqrt(dl / n));
    double ratio = 0.0;
    if (lhs > 0.0) ratio = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    const Verdict v = std::isfinite(ratio) && ratio <= cap ? Verdict::pass : Verdict::fail;
    report.stats.push_back(Statistic{fmt::format("ratio_{}_{}", s, t), p, ratio, 0.0, e.n_particles(), v});
  }
  report.verdict = combine(report.stats);
  return report;
}

DiagnosticReport innovation_check(std::span<const ParticleEnsemble> ensembles, const CoefficientSet& coeffs,
                                  std::span<const std::size_t> nodes, const InnovationOptions& options) {
  if (ensembles.empty()) throw InvalidArgument("innovation_check: no ensembles");
  const TimeGrid& grid = ensembles.front().grid();
  require_nodes(grid, nodes, "innovation_check");
  const std::size_t n_steps = grid.n_steps();
  const double dt = grid.dt();

  // Per sampling unit (ensemble, or particle when there is one ensemble):
  // total weight and weighted sums of B, B^2 and (B_t - B_s) B_s per node.
  struct Unit {
    double w = 0.0;
    std::vector<double> m1, m2, cross;
  };
  const bool by_particle = ensembles.size() == 1;
  std::vector<Unit> units;
  auto fresh_unit = [&] {
    Unit u;
    u.m1.assign(nodes.size(), 0.0);
    u.m2.assign(nodes.size(), 0.0);
    u.cross.assign(nodes.size(), 0.0);
    return u;
  };

  std::vector<double> innovation(n_steps + 1);
  for (const auto& e : ensembles) {
    if (!(e.grid() == grid)) throw GridMismatch("innovation_check: ensembles on different grids");
    const SamplePath& y = e.y_path();
    if (!by_particle) units.push_back(fresh_unit());
    for (std::size_t i = 0; i < e.n_particles(); ++i) {
      if (by_particle) units.push_back(fresh_unit());
      Unit& u = units.back();
      innovation[0] = 0.0;
      double drift = 0.0;
      for (std::size_t k = 0; k < n_steps; ++k) {
        drift += eval_h(coeffs, grid, k, e.x(i, k), y.prefix(k)) * dt;
        innovation[k + 1] = y[k + 1] - y[0] - drift;
      }
      const double w = options.use_kernel_weights ? std::exp(e.log_kernel(i, n_steps)) : 1.0;
      u.w += w;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double b = innovation[nodes[j]];
        const double bs = innovation[nodes[j] / 2];
        u.m1[j] += w * b;
        u.m2[j] += w * b * b;
        u.cross[j] += w * (b - bs) * bs;
      }
    }
  }

  struct Estimates {
    std::vector<double> mean, second, var, cross;
  };
  auto estimate = [&](const std::vector<std::size_t>& pick) {
    Estimates est{std::vector<double>(nodes.size()), std::vector<double>(nodes.size()),
                  std::vector<double>(nodes.size()), std::vector<double>(nodes.size())};
    double w = 0.0;
    std::vector<double> m1(nodes.size(), 0.0), m2(nodes.size(), 0.0), cr(nodes.size(), 0.0);
    for (std::size_t idx : pick) {
      const Unit& u = units[idx];
      w += u.w;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        m1[j] += u.m1[j];
        m2[j] += u.m2[j];
        cr[j] += u.cross[j];
      }
    }
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double t = grid.time(nodes[j]);
      est.mean[j] = m1[j] / w;
      est.second[j] = m2[j] / w - t;
      est.var[j] = m2[j] / w - est.mean[j] * est.mean[j];
      est.cross[j] = cr[j] / w;
    }
    return est;
  };

  std::vector<std::size_t> identity(units.size());
  std::iota(identity.begin(), identity.end(), 0);
  const Estimates point = estimate(identity);

  Engine engine(stream_seed(options.seed, kBootstrapStream));
  std::uniform_int_distribution<std::size_t> pick_unit(0, units.size() - 1);
  std::vector<Estimates> boot;
  boot.reserve(options.bootstrap);
  std::vector<std::size_t> pick(units.size());
  for (std::size_t b = 0; b < options.bootstrap; ++b) {
    for (auto& p : pick) p = pick_unit(engine);
    boot.push_back(estimate(pick));
  }
  auto boot_se = [&](auto member, std::size_t j) {
    std::vector<double> v;
    v.reserve(boot.size());
    for (const auto& e : boot) v.push_back((e.*member)[j]);
    return sample_sd(v);
  };

  DiagnosticReport report{.check = "innovation"};
  report.seed = options.seed;
  report.config = {{"threshold_se", 3.0},
                   {"variance_band", options.variance_band},
                   {"bootstrap", options.bootstrap},
                   {"units", units.size()},
                   {"unit", by_particle ? "particle" : "ensemble"},
                   {"kernel_weights", options.use_kernel_weights}};
  std::size_t particles = 0;
  for (const auto& e : ensembles) particles += e.n_particles();
  auto within = [](double value, double se) { return std::abs(value) <= 3.0 * se ? Verdict::pass : Verdict::fail; };
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double t = grid.time(nodes[j]);
    const double se_mean = boot_se(&Estimates::mean, j);
    const double se_second = boot_se(&Estimates::second, j);
    const double se_var = boot_se(&Estimates::var, j);
    const double se_cross = boot_se(&Estimates::cross, j);
    report.stats.push_back(Statistic{"mean_B2", nodes[j], point.mean[j], se_mean, particles,
                                     within(point.mean[j], se_mean)});
    report.stats.push_back(Statistic{"second_moment_minus_t", nodes[j], point.second[j], se_second, particles,
                                     within(point.second[j], se_second)});
    const bool band = t > 0.0 ? std::abs(point.var[j] - t) / t <= options.variance_band : point.var[j] == 0.0;
    report.stats.push_back(Statistic{"variance", nodes[j], point.var[j], se_var, particles,
                                     band ? Verdict::pass : Verdict::fail});
    report.stats.push_back(Statistic{"cross_moment", nodes[j], point.cross[j], se_cross, particles,
                                     within(point.cross[j], se_cross)});
  }
  report.verdict = combine(report.stats);
  return report;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("ols_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

DiagnosticReport continuity_exponent(const CoefficientSet& coeffs, const TimeGrid& grid, const SimConfig& sim,
                                     const ContinuityOptions& options) {
  if (options.replications < 30) {
    throw InsufficientReplications(
        fmt::format("continuity_exponent: {} replications, at least 30 required", options.replications));
  }
  if (options.lags.size() < 2) throw InvalidArgument("continuity_exponent: need at least two lags");
  for (std::size_t lag : options.lags) {
    if (lag == 0 || lag > grid.n_steps()) throw InvalidArgument("continuity_exponent: lag out of range");
  }
  const LocalizationConfig loc = calibrated_localization(coeffs, grid.horizon());
  const MeasurePath start = constant_path(grid, DiscreteMeasure::dirac(coeffs.x0));

  std::vector<std::vector<double>> per_rep(options.lags.size());
  for (std::size_t r = 0; r < options.replications; ++r) {
    SimConfig cfg = sim;
    cfg.master_seed = stream_seed(sim.master_seed, r);
    const TMapContext ctx{coeffs, draw_observation(grid, sim.increment_law, sim.master_seed, r), cfg};
    const MeasurePath path = solve(ctx, start, loc, options.tol, options.max_iter).final_path;
    for (std::size_t l = 0; l < options.lags.size(); ++l) {
      const std::size_t lag = options.lags[l];
      double acc = 0.0;
      for (std::size_t s = 0; s + lag <= grid.n_steps(); ++s) acc += std::pow(exact_w1(path[s], path[s + lag]), 4);
      per_rep[l].push_back(acc / static_cast<double>(grid.n_steps() - lag + 1));
    }
  }

  DiagnosticReport report{.check = "continuity"};
  report.seed = sim.master_seed;
  report.config = {{"replications", options.replications},
                   {"lags", options.lags},
                   {"slope_threshold", options.slope_threshold},
                   {"particles", sim.n_particles}};
  std::vector<double> log_lag, log_moment;
  bool all_zero = true, any_zero = false;
  for (std::size_t l = 0; l < options.lags.size(); ++l) {
    const auto& v = per_rep[l];
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    const double se = sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
    report.stats.push_back(Statistic{"fourth_moment_w1", options.lags[l], m, se, v.size(), Verdict::pass});
    all_zero = all_zero && m == 0.0;
    any_zero = any_zero || m == 0.0;
    log_lag.push_back(std::log(static_cast<double>(options.lags[l]) * grid.dt()));
    log_moment.push_back(std::log(m));
  }
  if (all_zero) {
    report.verdict = Verdict::degenerate;
    return report;
  }
  if (any_zero) {
    report.stats.push_back(Statistic{"slope", 0, std::numeric_limits<double>::quiet_NaN(), 0.0,
                                     options.replications, Verdict::fail});
    report.verdict = Verdict::fail;
    return report;
  }
  const double slope = ols_slope(log_lag, log_moment);
  const Verdict v = slope >= options.slope_threshold ? Verdict::pass : Verdict::fail;
  report.stats.push_back(Statistic{"slope", 0, slope, 0.0, options.replications, v});
  report.verdict = v;
  return report;
}

}  // namespace cmv
