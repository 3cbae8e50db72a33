#include "cmv/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cmv/conditional_law.hpp"
#include "cmv/errors.hpp"

#ifndef CMVLAB_VERSION
#define CMVLAB_VERSION "0.0.0"
#endif

namespace cmv {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + file.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw IoError("write failed for " + file.string());
}

void csv_preamble(std::ofstream& out, const Provenance* provenance) {
  if (provenance) {
    out << fmt::format("# config_hash={} master_seed={} version={}\n", provenance->config_hash,
                       provenance->master_seed, provenance->version);
  }
}

void append_array(std::string& line, std::span<const double> values) {
  line += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    fmt::format_to(std::back_inserter(line), "{:.17g}", values[i]);
  }
  line += ']';
}

}  // namespace

nlohmann::json Provenance::to_json() const {
  return {{"config_hash", config_hash}, {"master_seed", master_seed}, {"version", version}};
}

std::string artifact_version() { return CMVLAB_VERSION; }

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  return {{"atoms", std::vector<double>(mu.atoms().begin(), mu.atoms().end())},
          {"weights", std::vector<double>(mu.weights().begin(), mu.weights().end())}};
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  try {
    auto atoms = j.at("atoms").get<std::vector<double>>();
    auto weights = j.at("weights").get<std::vector<double>>();
    // Files written by this library are canonical; anything else is normalized.
    try {
      return DiscreteMeasure::from_canonical(atoms, weights);
    } catch (const InvalidArgument&) {
      return normalize(atoms, weights);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed measure: ") + e.what());
  }
}

void write_measure_path_jsonl(const std::filesystem::path& file, const MeasurePath& path,
                              const Provenance* provenance) {
  auto out = open_out(file);
  if (provenance) out << nlohmann::json{{"provenance", provenance->to_json()}}.dump() << '\n';
  std::string line;
  for (std::size_t k = 0; k < path.measures.size(); ++k) {
    line.clear();
    fmt::format_to(std::back_inserter(line), "{{\"t\":{:.17g},\"atoms\":", path.grid.time(k));
    append_array(line, path[k].atoms());
    line += ",\"weights\":";
    append_array(line, path[k].weights());
    line += "}\n";
    out << line;
  }
  finish(out, file);
}

MeasurePath read_measure_path_jsonl(const std::filesystem::path& file) {
  auto in = open_in(file);
  std::vector<double> times;
  std::vector<DiscreteMeasure> measures;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(fmt::format("{}: malformed JSONL line: {}", file.string(), e.what()));
    }
    if (!j.contains("t")) continue;  // header
    times.push_back(j.at("t").get<double>());
    measures.push_back(measure_from_json(j));
  }
  if (measures.size() < 2) throw IoError(file.string() + ": a measure path needs at least two nodes");
  const TimeGrid grid(times.back(), measures.size() - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - grid.time(k)) > 1e-9 * std::max(1.0, grid.horizon())) {
      throw IoError(file.string() + ": node times are not a uniform grid");
    }
  }
  return MeasurePath(grid, std::move(measures));
}

void write_measure_json(const std::filesystem::path& file, const DiscreteMeasure& mu) {
  auto out = open_out(file);
  std::string line = "{\"atoms\":";
  append_array(line, mu.atoms());
  line += ",\"weights\":";
  append_array(line, mu.weights());
  line += "}\n";
  out << line;
  finish(out, file);
}

std::variant<DiscreteMeasure, MeasurePath> read_measure_file(const std::filesystem::path& file) {
  auto in = open_in(file);
  std::string first;
  while (std::getline(in, first) && first.empty()) {
  }
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(first);
  } catch (const nlohmann::json::exception&) {
    // A pretty-printed single measure spans several lines.
    std::stringstream ss;
    ss << open_in(file).rdbuf();
    try {
      return measure_from_json(nlohmann::json::parse(ss.str()));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(file.string() + ": not a measure or measure path: " + e.what());
    }
  }
  if (head.contains("t") || head.contains("provenance")) return read_measure_path_jsonl(file);
  return measure_from_json(head);
}

nlohmann::json sample_path_to_json(const SamplePath& path) {
  return {{"horizon", path.grid.horizon()}, {"n_steps", path.grid.n_steps()}, {"values", path.values}};
}

SamplePath sample_path_from_json(const nlohmann::json& j) {
  try {
    const TimeGrid grid(j.at("horizon").get<double>(), j.at("n_steps").get<std::size_t>());
    return SamplePath(grid, j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed sample path: ") + e.what());
  }
}

SamplePath read_sample_path(const std::filesystem::path& file) { return sample_path_from_json(read_json(file)); }

void write_sample_path(const std::filesystem::path& file, const SamplePath& path) {
  write_json(file, sample_path_to_json(path));
}

nlohmann::json to_json(const LocalizationConfig& loc) {
  return {{"C1", loc.c1}, {"C2", loc.c2}, {"thresholds", loc.thresholds}};
}

nlohmann::json to_json(const FixedPointReport& report) {
  return {{"converged", report.converged},
          {"distances", report.distances},
          {"distance_level", report.distance_level},
          {"tau_ladder", report.tau_ladder},
          {"thresholds_used", report.thresholds_used},
          {"iterations_per_level", report.iterations_per_level},
          {"contraction_ratios", report.contraction_ratios},
          {"tol", report.tol},
          {"max_iter", report.max_iter},
          {"localization", to_json(report.localization)}};
}

nlohmann::json to_json(const DiagnosticReport& report) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : report.stats) {
    stats.push_back({{"name", s.name},
                     {"index", s.index},
                     {"value", s.value},
                     {"se", s.se},
                     {"sample_size", s.sample_size},
                     {"verdict", to_string(s.verdict)}});
  }
  return {{"check", report.check},
          {"verdict", to_string(report.verdict)},
          {"seed", report.seed},
          {"config", report.config},
          {"stats", stats}};
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
  finish(out, file);
}

nlohmann::json read_json(const std::filesystem::path& file) {
  auto in = open_in(file);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

void write_ensemble_summary_csv(const std::filesystem::path& file, const ParticleEnsemble& ensemble,
                                const Provenance* provenance) {
  auto out = open_out(file);
  csv_preamble(out, provenance);
  out << "t,particle_mean_X,particle_mean_L,min_L,max_L\n";
  const double n = static_cast<double>(ensemble.n_particles());
  for (std::size_t k = 0; k < ensemble.grid().n_nodes(); ++k) {
    double sx = 0.0, sl = 0.0, lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < ensemble.n_particles(); ++i) {
      const double l = std::exp(ensemble.log_kernel(i, k));
      sx += ensemble.x(i, k);
      sl += l;
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", ensemble.grid().time(k), sx / n, sl / n, lo, hi);
  }
  finish(out, file);
}

void write_ess_csv(const std::filesystem::path& file, const ParticleEnsemble& ensemble, const Provenance* provenance) {
  auto out = open_out(file);
  csv_preamble(out, provenance);
  out << "t,ess\n";
  for (std::size_t k = 0; k < ensemble.grid().n_nodes(); ++k) {
    out << fmt::format("{:.17g},{:.17g}\n", ensemble.grid().time(k), effective_sample_size(ensemble, k));
  }
  finish(out, file);
}

void write_quantile_csv(const std::filesystem::path& file, const MeasurePath& path, const Provenance* provenance) {
  auto out = open_out(file);
  csv_preamble(out, provenance);
  out << "t,mean,variance,q05,q25,q50,q75,q95\n";
  for (std::size_t k = 0; k < path.measures.size(); ++k) {
    const auto& mu = path[k];
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", path.grid.time(k),
                       mu.mean(), variance(mu), quantile(mu, 0.05), quantile(mu, 0.25), quantile(mu, 0.5),
                       quantile(mu, 0.75), quantile(mu, 0.95));
  }
  finish(out, file);
}

void write_trace_csv(const std::filesystem::path& file, const DiagnosticReport& report, const Provenance* provenance) {
  auto out = open_out(file);
  csv_preamble(out, provenance);
  out << "statistic,index,value,se,verdict\n";
  for (const auto& s : report.stats) {
    out << fmt::format("{},{},{:.17g},{:.17g},{}\n", s.name, s.index, s.value, s.se, to_string(s.verdict));
  }
  finish(out, file);
}

}  // namespace cmv
