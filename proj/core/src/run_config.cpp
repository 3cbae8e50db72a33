#include "cmv/run_config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "cmv/errors.hpp"
#include "cmv/io.hpp"

namespace cmv {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("key '{}' has the wrong type", key));
  }
}

void read_size(const nlohmann::json& j, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(fmt::format("key '{}' must be a non-negative integer", key));
  }
  out = v.get<std::size_t>();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

LocalizationConfig RunConfig::effective_localization() const {
  if (localization) return *localization;
  if (calibrate_localization) return calibrated_localization(coefficients(), horizon);
  return LocalizationConfig{};
}

MeasurePath RunConfig::initial_path() const {
  const double x0 = coefficients().x0;
  if (initial == "broad") {
    const std::vector<double> atoms{x0 - initial_spread, x0 + initial_spread};
    return constant_path(grid(), empirical(atoms));
  }
  return constant_path(grid(), DiscreteMeasure::dirac(x0));
}

RunConfig parse_run_config(const nlohmann::json& j) {
  reject_unknown(j,
                 {"scenario", "params", "horizon", "n_steps", "n_particles", "increment_law", "seed", "stratified",
                  "tol", "max_iter", "initial", "initial_spread", "localization", "diagnose", "kalman_p0",
                  "output_dir"},
                 "config");
  RunConfig cfg;
  read(j, "scenario", cfg.scenario);
  if (j.contains("params")) {
    require(j.at("params").is_object(), "'params' must be an object");
    cfg.params = j.at("params");
  }
  read(j, "horizon", cfg.horizon);
  read_size(j, "n_steps", cfg.n_steps);
  read_size(j, "n_particles", cfg.sim.n_particles);
  if (j.contains("increment_law")) {
    std::string law;
    read(j, "increment_law", law);
    try {
      cfg.sim.increment_law = parse_increment_law(law);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "seed", cfg.sim.master_seed);
  read(j, "stratified", cfg.sim.stratified);
  read(j, "tol", cfg.tol);
  read_size(j, "max_iter", cfg.max_iter);
  read(j, "initial", cfg.initial);
  read(j, "initial_spread", cfg.initial_spread);
  read(j, "kalman_p0", cfg.kalman_p0);
  read(j, "output_dir", cfg.output_dir);

  if (j.contains("localization") && j.at("localization").is_string()) {
    require(j.at("localization") == "calibrated", "localization must be an object or \"calibrated\"");
    cfg.calibrate_localization = true;
  } else if (j.contains("localization")) {
    const auto& l = j.at("localization");
    reject_unknown(l, {"C1", "C2", "thresholds"}, "localization");
    LocalizationConfig loc;
    read(l, "C1", loc.c1);
    read(l, "C2", loc.c2);
    read(l, "thresholds", loc.thresholds);
    try {
      loc.check();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    cfg.localization = loc;
  }
  if (j.contains("diagnose")) {
    const auto& d = j.at("diagnose");
    reject_unknown(d,
                   {"y_draws", "particles_per_draw", "checkpoints", "replications", "lags", "ratio_cap", "bootstrap"},
                   "diagnose");
    read_size(d, "y_draws", cfg.diagnose.y_draws);
    read_size(d, "particles_per_draw", cfg.diagnose.particles_per_draw);
    read_size(d, "checkpoints", cfg.diagnose.checkpoints);
    read_size(d, "replications", cfg.diagnose.replications);
    read(d, "lags", cfg.diagnose.lags);
    read(d, "ratio_cap", cfg.diagnose.ratio_cap);
    read_size(d, "bootstrap", cfg.diagnose.bootstrap);
    require(cfg.diagnose.y_draws >= 1, "diagnose.y_draws must be positive");
    require(cfg.diagnose.particles_per_draw >= 1, "diagnose.particles_per_draw must be positive");
    require(cfg.diagnose.checkpoints >= 1, "diagnose.checkpoints must be positive");
    require(!cfg.diagnose.lags.empty(), "diagnose.lags must not be empty");
    for (auto lag : cfg.diagnose.lags) require(lag >= 1, "diagnose.lags must be positive");
    require(cfg.diagnose.ratio_cap > 0.0, "diagnose.ratio_cap must be positive");
  }

  require(std::isfinite(cfg.horizon) && cfg.horizon > 0.0, "horizon must be positive");
  require(cfg.n_steps >= 1, "n_steps must be positive");
  require(cfg.sim.n_particles >= 1, "n_particles must be positive");
  require(std::isfinite(cfg.tol) && cfg.tol > 0.0, "tol must be positive");
  require(cfg.max_iter >= 1, "max_iter must be positive");
  require(cfg.initial == "dirac" || cfg.initial == "broad", "initial must be 'dirac' or 'broad'");
  require(std::isfinite(cfg.initial_spread) && cfg.initial_spread > 0.0, "initial_spread must be positive");
  require(std::isfinite(cfg.kalman_p0) && cfg.kalman_p0 >= 0.0, "kalman_p0 must be non-negative");
  try {
    (void)cfg.coefficients();
  } catch (const UnknownScenario&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = {{"scenario", cfg.scenario},
                      {"params", cfg.params},
                      {"horizon", cfg.horizon},
                      {"n_steps", cfg.n_steps},
                      {"n_particles", cfg.sim.n_particles},
                      {"increment_law", std::string(to_string(cfg.sim.increment_law))},
                      {"seed", cfg.sim.master_seed},
                      {"stratified", cfg.sim.stratified},
                      {"tol", cfg.tol},
                      {"max_iter", cfg.max_iter},
                      {"initial", cfg.initial},
                      {"initial_spread", cfg.initial_spread},
                      {"kalman_p0", cfg.kalman_p0},
                      {"output_dir", cfg.output_dir},
                      {"diagnose",
                       {{"y_draws", cfg.diagnose.y_draws},
                        {"particles_per_draw", cfg.diagnose.particles_per_draw},
                        {"checkpoints", cfg.diagnose.checkpoints},
                        {"replications", cfg.diagnose.replications},
                        {"lags", cfg.diagnose.lags},
                        {"ratio_cap", cfg.diagnose.ratio_cap},
                        {"bootstrap", cfg.diagnose.bootstrap}}}};
  if (cfg.localization) {
    j["localization"] = to_json(*cfg.localization);
  } else if (cfg.calibrate_localization) {
    j["localization"] = "calibrated";
  }
  return j;
}

RunConfig load_run_config(const std::filesystem::path& file) { return parse_run_config(read_json(file)); }

std::string config_hash(const RunConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cmv
