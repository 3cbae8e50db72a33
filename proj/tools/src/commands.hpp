#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmv/run_config.hpp"

namespace cmv::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kConfigError = 3,
  kNonConvergence = 4,
  kIoError = 5,
  kPrecondition = 6,
};

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> y_path;
};

/// Config file (or defaults) with the --seed and --out overrides applied.
RunConfig resolve_config(const CommonOptions& opts);

/// The --y-path file when given, else a fresh draw keyed by the master seed.
SamplePath resolve_observation(const RunConfig& cfg, const CommonOptions& opts);

std::vector<std::string> diagnostic_checks();

int cmd_solve(const CommonOptions& opts, std::ostream& log);
int cmd_oracle(const CommonOptions& opts, const std::string& which, const std::optional<std::filesystem::path>& paired,
               std::ostream& log);
int cmd_diagnose(const CommonOptions& opts, const std::vector<std::string>& checks, std::ostream& log);
int cmd_w1(const std::filesystem::path& file_a, const std::filesystem::path& file_b, std::ostream& out,
           std::ostream& log);

/// Runs `body` and maps library exceptions to exit codes.
int guarded(std::ostream& log, const std::function<int()>& body);

}  // namespace cmv::cli
