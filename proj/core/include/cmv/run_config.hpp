#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmv/coefficients.hpp"
#include "cmv/fixed_point.hpp"
#include "cmv/reference_sim.hpp"

namespace cmv {

struct DiagnoseSettings {
  /// Independent observation draws for pooled checks.
  std::size_t y_draws = 10000;
  std::size_t particles_per_draw = 10;
  std::size_t checkpoints = 5;
  std::size_t replications = 30;
  std::vector<std::size_t> lags{1, 2, 4, 8};
  double ratio_cap = 10.0;
  std::size_t bootstrap = 200;
};

/// One run, serialized as a single JSON file.
struct RunConfig {
  std::string scenario = "meanfield-tanh";
  nlohmann::json params = nlohmann::json::object();
  double horizon = 0.25;
  std::size_t n_steps = 50;
  SimConfig sim;
  double tol = 5e-3;
  std::size_t max_iter = 10;
  /// "dirac" (constant path at x0) or "broad" (constant two-atom path at x0 +- spread).
  std::string initial = "dirac";
  double initial_spread = 1.0;
  /// Explicit constants; absent means LocalizationConfig{} unless
  /// calibrate_localization asks for calibrated_localization. In JSON the key
  /// holds either an object or the string "calibrated".
  std::optional<LocalizationConfig> localization;
  bool calibrate_localization = false;
  DiagnoseSettings diagnose;
  double kalman_p0 = 0.0;
  std::string output_dir = "out";

  TimeGrid grid() const { return TimeGrid(horizon, n_steps); }
  CoefficientSet coefficients() const { return builtin(scenario, params); }
  LocalizationConfig effective_localization() const;
  MeasurePath initial_path() const;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& file);

/// FNV-1a 64 of the canonical JSON dump without output_dir, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace cmv
