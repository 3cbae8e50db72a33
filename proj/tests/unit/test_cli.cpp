#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmv/io.hpp"
#include "commands.hpp"

namespace cmv::cli {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cmvlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write_config(const nlohmann::json& j, const std::string& name = "config.json") {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump();
    return p;
  }

  CommonOptions opts(const fs::path& config, const std::string& out) {
    CommonOptions o;
    o.config = config;
    o.out = dir_ / out;
    return o;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST_F(Cli, SolveNoObservation) {
  const auto cfg = write_config({{"scenario", "no-observation"}, {"n_steps", 8}, {"n_particles", 40}});
  EXPECT_EQ(guarded(log_, [&] { return cmd_solve(opts(cfg, "out"), log_); }), kOk);
  for (const char* f : {"report.json", "final_path.jsonl", "quantiles.csv", "ensemble_summary.csv", "ess.csv",
                        "y_path.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
}

TEST_F(Cli, MalformedConfigIsParseError) {
  std::ofstream(dir_ / "bad.json") << "{\"scenario\": ";
  EXPECT_EQ(guarded(log_, [&] { return cmd_solve(opts(dir_ / "bad.json", "out"), log_); }), kConfigError);
  const auto unknown = write_config({{"sceanrio", "constant"}}, "unknown.json");
  EXPECT_EQ(guarded(log_, [&] { return cmd_solve(opts(unknown, "out"), log_); }), kConfigError);
}

TEST_F(Cli, MeanfieldDefaultsConverge) {
  CommonOptions o;
  o.out = dir_ / "out";
  EXPECT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  const auto report = read_json(dir_ / "out" / "report.json");
  EXPECT_TRUE(report["fixed_point"]["converged"].get<bool>());
  EXPECT_EQ(report["provenance"]["master_seed"], 0);
}

TEST_F(Cli, NonConvergenceExitCode) {
  const auto cfg = write_config({{"tol", 1e-300}, {"max_iter", 2}, {"n_steps", 10}, {"n_particles", 50}});
  EXPECT_EQ(guarded(log_, [&] { return cmd_solve(opts(cfg, "out"), log_); }), kNonConvergence);
  EXPECT_FALSE(read_json(dir_ / "out" / "report.json")["fixed_point"]["converged"].get<bool>());
}

TEST_F(Cli, SolveIsBitReproducibleAndSeedOverrides) {
  const auto cfg = write_config({{"n_steps", 20}, {"n_particles", 200}});
  auto o = opts(cfg, "a");
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  o.out = dir_ / "b";
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  for (const char* f : {"report.json", "final_path.jsonl", "quantiles.csv", "ensemble_summary.csv", "ess.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  o.out = dir_ / "c";
  o.seed = 99;
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  EXPECT_NE(slurp(dir_ / "a" / "final_path.jsonl"), slurp(dir_ / "c" / "final_path.jsonl"));
}

TEST_F(Cli, LoadedObservationPath) {
  const auto cfg = write_config({{"n_steps", 10}, {"n_particles", 50}});
  auto o = opts(cfg, "a");
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  o.out = dir_ / "b";
  o.seed = 7;  // the loaded path wins over the seed-keyed draw
  o.y_path = dir_ / "a" / "y_path.json";
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  EXPECT_EQ(read_sample_path(dir_ / "b" / "y_path.json").values, read_sample_path(dir_ / "a" / "y_path.json").values);

  const auto other = write_config({{"n_steps", 12}}, "other.json");
  auto bad = opts(other, "c");
  bad.y_path = dir_ / "a" / "y_path.json";
  EXPECT_EQ(guarded(log_, [&] { return cmd_solve(bad, log_); }), kPrecondition);
}

TEST_F(Cli, TreeOracleMatchesStratifiedSolve) {
  const auto cfg = write_config({{"n_steps", 4},
                                 {"n_particles", 16},
                                 {"increment_law", "rademacher"},
                                 {"stratified", true},
                                 {"tol", 1e-9},
                                 {"max_iter", 60}});
  auto o = opts(cfg, "out");
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  const std::optional<fs::path> paired = dir_ / "out" / "final_path.jsonl";
  ASSERT_EQ(guarded(log_, [&] { return cmd_oracle(o, "tree", paired, log_); }), kOk);
  const auto report = read_json(dir_ / "out" / "oracle_report.json");
  EXPECT_LE(report["comparison"]["sup_w1"].get<double>(), 1e-12);
}

TEST_F(Cli, KalmanOracleReport) {
  const auto cfg = write_config(
      {{"scenario", "linear-clipped"}, {"horizon", 1.0}, {"n_steps", 50}, {"n_particles", 2000}});
  auto o = opts(cfg, "out");
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  const std::optional<fs::path> paired = dir_ / "out" / "final_path.jsonl";
  ASSERT_EQ(guarded(log_, [&] { return cmd_oracle(o, "kalman", paired, log_); }), kOk);
  const auto report = read_json(dir_ / "out" / "oracle_report.json");
  EXPECT_LT(report["comparison"]["mean_rmse"].get<double>(), 0.1);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "kalman.csv"));
}

TEST_F(Cli, OracleErrors) {
  const auto cfg = write_config({{"n_steps", 4}});
  auto o = opts(cfg, "out");
  EXPECT_EQ(guarded(log_, [&] { return cmd_oracle(o, "unknown", std::nullopt, log_); }), kUsage);
  EXPECT_EQ(guarded(log_, [&] { return cmd_oracle(o, "tree", dir_ / "absent.jsonl", log_); }), kIoError);
  EXPECT_EQ(guarded(log_, [&] { return cmd_oracle(o, "kalman", std::nullopt, log_); }), kPrecondition);
}

TEST_F(Cli, DiagnoseMartingaleOnZeroObservation) {
  const auto cfg = write_config({{"scenario", "no-observation"}, {"n_steps", 10},
                                 {"diagnose", {{"y_draws", 20}, {"particles_per_draw", 10}}}});
  EXPECT_EQ(guarded(log_, [&] { return cmd_diagnose(opts(cfg, "out"), {"martingale"}, log_); }), kOk);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "diagnose_martingale.json"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "diagnose_martingale.csv"));
}

TEST_F(Cli, DiagnosePreconditionsAndUnknownChecks) {
  const auto cfg = write_config({{"n_steps", 20}, {"diagnose", {{"replications", 1}}}});
  EXPECT_EQ(guarded(log_, [&] { return cmd_diagnose(opts(cfg, "out"), {"continuity"}, log_); }), kPrecondition);
  EXPECT_EQ(guarded(log_, [&] { return cmd_diagnose(opts(cfg, "out"), {"astrology"}, log_); }), kUsage);
}

TEST_F(Cli, DiagnoseFullSuiteOnDefaults) {
  CommonOptions o;
  o.out = dir_ / "out";
  EXPECT_EQ(guarded(log_, [&] { return cmd_diagnose(o, {}, log_); }), kOk) << log_.str();
}

TEST_F(Cli, W1Files) {
  write_measure_json(dir_ / "d0.json", DiscreteMeasure::dirac(0.0));
  write_measure_json(dir_ / "d1.json", DiscreteMeasure::dirac(1.0));
  std::ostringstream out;
  EXPECT_EQ(guarded(log_, [&] { return cmd_w1(dir_ / "d0.json", dir_ / "d0.json", out, log_); }), kOk);
  EXPECT_EQ(nlohmann::json::parse(out.str())["w1"].get<double>(), 0.0);
  out.str("");
  EXPECT_EQ(guarded(log_, [&] { return cmd_w1(dir_ / "d0.json", dir_ / "d1.json", out, log_); }), kOk);
  EXPECT_EQ(nlohmann::json::parse(out.str())["w1"].get<double>(), 1.0);

  const auto cfg = write_config({{"n_steps", 10}, {"n_particles", 100}});
  auto o = opts(cfg, "a");
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  o.out = dir_ / "b";
  o.seed = 3;
  ASSERT_EQ(guarded(log_, [&] { return cmd_solve(o, log_); }), kOk);
  out.str("");
  EXPECT_EQ(guarded(log_, [&] {
              return cmd_w1(dir_ / "a" / "final_path.jsonl", dir_ / "b" / "final_path.jsonl", out, log_);
            }),
            kOk);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["nodewise"].size(), 11u);
  EXPECT_GT(j["sup"].get<double>(), 0.0);

  EXPECT_EQ(guarded(log_, [&] { return cmd_w1(dir_ / "d0.json", dir_ / "a" / "final_path.jsonl", out, log_); }),
            kPrecondition);
  EXPECT_EQ(guarded(log_, [&] { return cmd_w1(dir_ / "d0.json", dir_ / "nothing.json", out, log_); }), kIoError);
}

}  // namespace
}  // namespace cmv::cli
