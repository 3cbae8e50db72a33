#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace cmv::cli;
  CLI::App app{"Conditional McKean-Vlasov solver and verification lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CMVLAB_VERSION));

  CommonOptions common;
  std::string config, out, y_path;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run configuration (JSON)");
    sub->add_option("--seed", seed, "Master seed, overrides the config");
    sub->add_option("--out", out, "Output directory, overrides the config");
    sub->add_option("--y-path", y_path, "Observation path file instead of a fresh draw");
  };

  auto* solve = app.add_subcommand("solve", "Localized fixed point of the solution mapping");
  add_common(solve);

  auto* oracle = app.add_subcommand("oracle", "Exact tree or Kalman-Bucy reference");
  add_common(oracle);
  std::string which;
  std::string paired;
  oracle->add_option("which", which, "tree | kalman")->required();
  oracle->add_option("--paired", paired, "final_path.jsonl of a solve run to compare against");

  auto* diagnose = app.add_subcommand("diagnose", "Statistical checks");
  add_common(diagnose);
  std::vector<std::string> checks;
  diagnose->add_option("--checks", checks, "Subset of martingale, zeta, prop41, innovation, continuity")
      ->delimiter(',');

  auto* w1 = app.add_subcommand("w1", "Exact W1 between two measure or measure-path files");
  std::string file_a, file_b;
  w1->add_option("file_a", file_a)->required();
  w1->add_option("file_b", file_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  auto* active = app.get_subcommands().front();
  if (active != w1) {
    if (active->count("--config")) common.config = config;
    if (active->count("--seed")) common.seed = seed;
    if (active->count("--out")) common.out = out;
    if (active->count("--y-path")) common.y_path = y_path;
  }

  return guarded(std::cerr, [&]() -> int {
    if (active == solve) return cmd_solve(common, std::cerr);
    if (active == oracle) {
      std::optional<std::filesystem::path> p;
      if (!paired.empty()) p = paired;
      return cmd_oracle(common, which, p, std::cerr);
    }
    if (active == diagnose) return cmd_diagnose(common, checks, std::cerr);
    return cmd_w1(file_a, file_b, std::cout, std::cerr);
  });
}
