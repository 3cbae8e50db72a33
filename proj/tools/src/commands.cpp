#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cmv/conditional_law.hpp"
#include "cmv/diagnostics.hpp"
#include "cmv/errors.hpp"
#include "cmv/fixed_point.hpp"
#include "cmv/io.hpp"
#include "cmv/oracles.hpp"
#include "cmv/rng.hpp"

namespace cmv::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kValidationProbes = 256;

Provenance provenance_of(const RunConfig& cfg) {
  return {config_hash(cfg), cfg.sim.master_seed, artifact_version()};
}

/// The run config as recorded in reports; the output directory is left out so
/// reruns into different directories produce identical files.
nlohmann::json recorded(const RunConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("output_dir");
  return j;
}

nlohmann::json stamped(const Provenance& prov, nlohmann::json body) {
  body["provenance"] = prov.to_json();
  return body;
}

/// `count` evenly spaced nodes in (0, n_steps].
std::vector<std::size_t> checkpoints(std::size_t n_steps, std::size_t count) {
  std::set<std::size_t> nodes;
  for (std::size_t j = 1; j <= count; ++j) {
    nodes.insert(std::max<std::size_t>(1, (j * n_steps + count / 2) / count));
  }
  return {nodes.begin(), nodes.end()};
}

/// The initial iterate the config did not choose.
MeasurePath alternative_path(const RunConfig& cfg) {
  RunConfig other = cfg;
  other.initial = cfg.initial == "dirac" ? "broad" : "dirac";
  return other.initial_path();
}

void check_coefficients(const RunConfig& cfg, const CoefficientSet& coeffs) {
  validate(coeffs, kValidationProbes, stream_seed(cfg.sim.master_seed, kProbeStream), cfg.horizon).throw_if_failed();
}

void write_report(const fs::path& dir, const std::string& stem, const DiagnosticReport& report,
                  const Provenance& prov) {
  write_json(dir / (stem + ".json"), stamped(prov, to_json(report)));
  write_trace_csv(dir / (stem + ".csv"), report, &prov);
}

}  // namespace

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnknownScenario& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NonConvergence& e) {
    log << "non-convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const LevelExhaustion& e) {
    log << "non-convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    log << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kPrecondition;
  }
}

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config ? load_run_config(*opts.config) : RunConfig{};
  if (opts.seed) cfg.sim.master_seed = *opts.seed;
  if (opts.out) cfg.output_dir = opts.out->string();
  return cfg;
}

SamplePath resolve_observation(const RunConfig& cfg, const CommonOptions& opts) {
  if (!opts.y_path) return draw_observation(cfg.grid(), cfg.sim.increment_law, cfg.sim.master_seed);
  SamplePath y = read_sample_path(*opts.y_path);
  if (!(y.grid == cfg.grid())) {
    throw GridMismatch(fmt::format("observation path has {} steps over [0, {}], config expects {} over [0, {}]",
                                   y.grid.n_steps(), y.grid.horizon(), cfg.n_steps, cfg.horizon));
  }
  return y;
}

std::vector<std::string> diagnostic_checks() { return {"martingale", "zeta", "prop41", "innovation", "continuity"}; }

int cmd_solve(const CommonOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const Provenance prov = provenance_of(cfg);
  const fs::path dir = cfg.output_dir;
  const TMapContext ctx{cfg.coefficients(), resolve_observation(cfg, opts), cfg.sim};
  check_coefficients(cfg, ctx.coeffs);
  const LocalizationConfig loc = cfg.effective_localization();

  write_json(dir / "y_path.json", stamped(prov, sample_path_to_json(ctx.y_path)));
  const FixedPointReport report = [&] {
   try {
    return solve(ctx, cfg.initial_path(), loc, cfg.tol, cfg.max_iter);
  } catch (const NonConvergence& e) {
    write_json(dir / "report.json", stamped(prov, {{"config", recorded(cfg)},
                                                   {"fixed_point",
                                                    {{"converged", false},
                                                     {"distances", e.distances()},
                                                     {"tol", cfg.tol},
                                                     {"max_iter", cfg.max_iter},
                                                     {"localization", to_json(loc)}}}}));
    throw;
  }
  }();
  write_json(dir / "report.json", stamped(prov, {{"config", recorded(cfg)}, {"fixed_point", to_json(report)}}));
  write_measure_path_jsonl(dir / "final_path.jsonl", report.final_path, &prov);
  write_quantile_csv(dir / "quantiles.csv", report.final_path, &prov);
  const ParticleEnsemble ensemble = simulate_ensemble(ctx.coeffs, report.final_path, ctx.y_path, ctx.sim);
  write_ensemble_summary_csv(dir / "ensemble_summary.csv", ensemble, &prov);
  write_ess_csv(dir / "ess.csv", ensemble, &prov);

  fmt::print(log, "solve: scenario={} converged after {} iterations over {} level(s), last distance {:.3g}; wrote {}\n",
             cfg.scenario, report.distances.size(), report.tau_ladder.size(),
             report.distances.empty() ? 0.0 : report.distances.back(), dir.string());
  return kOk;
}

int cmd_oracle(const CommonOptions& opts, const std::string& which, const std::optional<fs::path>& paired,
               std::ostream& log) {
  if (which != "tree" && which != "kalman") {
    fmt::print(log, "usage error: unknown oracle '{}' (expected tree or kalman)\n", which);
    return kUsage;
  }
  const RunConfig cfg = resolve_config(opts);
  const Provenance prov = provenance_of(cfg);
  const fs::path dir = cfg.output_dir;
  const CoefficientSet coeffs = cfg.coefficients();
  const SamplePath y = resolve_observation(cfg, opts);
  std::optional<MeasurePath> other;
  if (paired) {
    if (!fs::exists(*paired)) throw IoError("paired output " + paired->string() + " does not exist");
    other = read_measure_path_jsonl(*paired);
    if (!(other->grid == y.grid)) throw GridMismatch("paired output is on a different grid");
  }

  nlohmann::json report = {{"oracle", which}, {"config", recorded(cfg)}};
  if (which == "tree") {
    const MeasurePath exact = tree_fixed_point(TreeInstance{coeffs, y}, cfg.tol, cfg.max_iter);
    write_measure_path_jsonl(dir / "oracle_path.jsonl", exact, &prov);
    if (other) {
      const auto trace = nodewise_w1(exact, *other);
      const double sup = *std::max_element(trace.begin(), trace.end());
      report["comparison"] = {{"nodewise_w1", trace}, {"sup_w1", sup}};
      fmt::print(log, "oracle tree: sup W1 against {} = {:.3e}\n", paired->string(), sup);
    }
  } else {
    if (cfg.scenario != "linear-clipped") {
      throw InvalidArgument("the kalman oracle needs the linear-clipped scenario, got " + cfg.scenario);
    }
    const double radius = cfg.params.value("R", 8.0);
    const KalmanSpec spec{cfg.params.value("s0", 1.0), cfg.params.value("c", 0.5), coeffs.x0, cfg.kalman_p0};
    const KalmanPosterior post = kalman_posterior(spec, y);
    {
      std::ofstream csv(dir / "kalman.csv");
      if (!csv) throw IoError("cannot write " + (dir / "kalman.csv").string());
      fmt::print(csv, "# config_hash={} master_seed={} version={}\n", prov.config_hash, prov.master_seed,
                 prov.version);
      csv << "t,mean,variance\n";
      for (std::size_t k = 0; k < y.grid.n_nodes(); ++k) {
        fmt::print(csv, "{:.17g},{:.17g},{:.17g}\n", y.grid.time(k), post.mean[k], post.variance[k]);
      }
    }
    if (other) {
      std::vector<double> mean_err, var_err, clipped;
      double mean_ss = 0.0, var_ss = 0.0;
      for (std::size_t k = 0; k < y.grid.n_nodes(); ++k) {
        const auto& mu = (*other)[k];
        const double dm = mu.mean() - post.mean[k];
        const double dv = variance(mu) - post.variance[k];
        mean_err.push_back(std::abs(dm));
        var_err.push_back(post.variance[k] > 0.0 ? std::abs(dv) / post.variance[k] : std::abs(dv));
        mean_ss += dm * dm;
        var_ss += dv * dv;
        double mass = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
          if (std::abs(mu.atoms()[i]) > radius) mass += mu.weights()[i];
        }
        clipped.push_back(mass);
      }
      const double n = static_cast<double>(y.grid.n_nodes());
      report["comparison"] = {{"mean_rmse", std::sqrt(mean_ss / n)},
                              {"variance_rmse", std::sqrt(var_ss / n)},
                              {"abs_mean_error", mean_err},
                              {"rel_variance_error", var_err},
                              {"clipped_mass", clipped},
                              {"max_clipped_mass", *std::max_element(clipped.begin(), clipped.end())}};
      fmt::print(log, "oracle kalman: mean RMSE {:.3e}, variance RMSE {:.3e}\n", std::sqrt(mean_ss / n),
                 std::sqrt(var_ss / n));
    }
  }
  write_json(dir / "oracle_report.json", stamped(prov, std::move(report)));
  return kOk;
}

int cmd_diagnose(const CommonOptions& opts, const std::vector<std::string>& checks, std::ostream& log) {
  const auto known = diagnostic_checks();
  for (const auto& c : checks) {
    if (std::find(known.begin(), known.end(), c) == known.end()) {
      fmt::print(log, "usage error: unknown check '{}'\n", c);
      return kUsage;
    }
  }
  const std::vector<std::string> selected = checks.empty() ? known : checks;
  const RunConfig cfg = resolve_config(opts);
  const Provenance prov = provenance_of(cfg);
  const fs::path dir = cfg.output_dir;
  const CoefficientSet coeffs = cfg.coefficients();
  check_coefficients(cfg, coeffs);
  const TimeGrid grid = cfg.grid();
  const auto& ds = cfg.diagnose;
  const auto nodes = checkpoints(cfg.n_steps, ds.checkpoints);
  const LocalizationConfig loc = cfg.effective_localization();

  // Independent (Y, particle seed) draws.
  auto draw_sim = [&](std::size_t d) {
    SimConfig sim = cfg.sim;
    sim.master_seed = stream_seed(cfg.sim.master_seed, d);
    sim.n_particles = ds.particles_per_draw;
    sim.stratified = false;
    return sim;
  };
  auto draw_y = [&](std::size_t d) {
    if (d == 0 && opts.y_path) return resolve_observation(cfg, opts);
    return draw_observation(grid, cfg.sim.increment_law, cfg.sim.master_seed, d);
  };

  bool all_pass = true;
  for (const auto& check : selected) {
    DiagnosticReport report;
    if (check == "martingale") {
      const MeasurePath mu = cfg.initial_path();
      std::vector<ParticleEnsemble> ensembles;
      for (std::size_t d = 0; d < ds.y_draws; ++d) {
        ensembles.push_back(simulate_ensemble(coeffs, mu, draw_y(d), draw_sim(d)));
      }
      report = martingale_check(ensembles, nodes);
    } else if (check == "zeta") {
      const SamplePath y = draw_y(0);
      const auto a = simulate_ensemble(coeffs, cfg.initial_path(), y, cfg.sim);
      const auto b = simulate_ensemble(coeffs, alternative_path(cfg), y, cfg.sim);
      const auto zeta = zeta_path(a, b);
      const LocalizationConfig bound = cfg.localization ? *cfg.localization : calibrated_localization(coeffs, cfg.horizon);
      report = zeta_bound_check(zeta, a_process(z_envelope(coeffs, y), bound));
    } else if (check == "prop41") {
      const TMapContext ctx{coeffs, draw_y(0), cfg.sim};
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i; j < nodes.size(); ++j) pairs.emplace_back(nodes[i], nodes[j]);
      }
      report = prop41_ratio_probe(cfg.initial_path(), alternative_path(cfg), ctx, pairs, ds.ratio_cap);
    } else if (check == "innovation") {
      std::vector<ParticleEnsemble> ensembles;
      for (std::size_t d = 0; d < ds.y_draws; ++d) {
        const TMapContext ctx{coeffs, draw_y(d), draw_sim(d)};
        const auto fp = solve(ctx, cfg.initial_path(), loc, cfg.tol, cfg.max_iter);
        ensembles.push_back(simulate_ensemble(coeffs, fp.final_path, ctx.y_path, ctx.sim));
      }
      InnovationOptions io;
      io.bootstrap = ds.bootstrap;
      io.seed = stream_seed(cfg.sim.master_seed, kBootstrapStream);
      report = innovation_check(ensembles, coeffs, nodes, io);
    } else {
      ContinuityOptions co;
      co.lags = ds.lags;
      co.replications = ds.replications;
      co.tol = cfg.tol;
      co.max_iter = cfg.max_iter;
      for (auto lag : co.lags) {
        if (lag >= cfg.n_steps) throw InvalidArgument(fmt::format("lag {} does not fit in {} steps", lag, cfg.n_steps));
      }
      report = continuity_exponent(coeffs, grid, cfg.sim, co);
    }
    report.seed = cfg.sim.master_seed;
    write_report(dir, "diagnose_" + check, report, prov);
    fmt::print(log, "{:<11} {}\n", check, to_string(report.verdict));
    all_pass = all_pass && report.passed();
  }
  return all_pass ? kOk : kCheckFailed;
}

int cmd_w1(const fs::path& file_a, const fs::path& file_b, std::ostream& out, std::ostream& log) {
  const auto a = read_measure_file(file_a);
  const auto b = read_measure_file(file_b);
  nlohmann::json result;
  if (a.index() != b.index()) {
    throw InvalidArgument("shape mismatch: one file holds a single measure, the other a measure path");
  }
  if (const auto* ma = std::get_if<DiscreteMeasure>(&a)) {
    result = {{"w1", exact_w1(*ma, std::get<DiscreteMeasure>(b))}};
  } else {
    const auto& pa = std::get<MeasurePath>(a);
    const auto& pb = std::get<MeasurePath>(b);
    if (!(pa.grid == pb.grid)) throw GridMismatch("shape mismatch: measure paths live on different grids");
    const auto trace = nodewise_w1(pa, pb);
    result = {{"nodewise", trace}, {"sup", *std::max_element(trace.begin(), trace.end())}};
  }
  out << result.dump() << '\n';
  (void)log;
  return kOk;
}

}  // namespace cmv::cli
