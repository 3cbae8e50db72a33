#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "cmv/diagnostics.hpp"
#include "cmv/fixed_point.hpp"
#include "cmv/measures.hpp"
#include "cmv/reference_sim.hpp"

namespace cmv {

/// Stamped into every output file so results can be traced to their run.
struct Provenance {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string version;

  nlohmann::json to_json() const;
};

std::string artifact_version();

/// 17 significant digits.
std::string format_double(double x);

nlohmann::json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

/// JSONL: an optional {"provenance": ...} header line, then one line
/// {"t": time, "atoms": [...], "weights": [...]} per node.
void write_measure_path_jsonl(const std::filesystem::path& file, const MeasurePath& path,
                              const Provenance* provenance = nullptr);
MeasurePath read_measure_path_jsonl(const std::filesystem::path& file);

void write_measure_json(const std::filesystem::path& file, const DiscreteMeasure& mu);

/// A file holding either a single measure object or a measure-path JSONL.
std::variant<DiscreteMeasure, MeasurePath> read_measure_file(const std::filesystem::path& file);

nlohmann::json sample_path_to_json(const SamplePath& path);
SamplePath sample_path_from_json(const nlohmann::json& j);
SamplePath read_sample_path(const std::filesystem::path& file);
void write_sample_path(const std::filesystem::path& file, const SamplePath& path);

nlohmann::json to_json(const FixedPointReport& report);
nlohmann::json to_json(const DiagnosticReport& report);
nlohmann::json to_json(const LocalizationConfig& loc);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

/// Columns: t, particle_mean_X, particle_mean_L, min_L, max_L.
void write_ensemble_summary_csv(const std::filesystem::path& file, const ParticleEnsemble& ensemble,
                                const Provenance* provenance = nullptr);
/// Columns: t, ess.
void write_ess_csv(const std::filesystem::path& file, const ParticleEnsemble& ensemble,
                   const Provenance* provenance = nullptr);
/// Columns: t, mean, variance, q05, q25, q50, q75, q95.
void write_quantile_csv(const std::filesystem::path& file, const MeasurePath& path,
                        const Provenance* provenance = nullptr);
/// Columns: statistic, index, value, se, verdict.
void write_trace_csv(const std::filesystem::path& file, const DiagnosticReport& report,
                     const Provenance* provenance = nullptr);

}  // namespace cmv
