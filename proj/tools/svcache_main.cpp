// CLI front end: optimize / evaluate / sweep over a JSON experiment config.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "svcache/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Edge caching of SVC-layered video: delay optimization and simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string placement_path;
  std::string axis;
  svcache::CliOverrides overrides;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string mode;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--trials", trials, "override the Monte Carlo trial count");
    cmd->add_option("--mode", mode, "delivery mode: sequential, parallel_ilt, slt");
  };

  CLI::App* opt = app.add_subcommand("optimize", "gradient projection over caching probabilities");
  add_common(opt);
  CLI::App* eval = app.add_subcommand("evaluate", "analytic + Monte Carlo delay of a placement");
  add_common(eval);
  eval->add_option("--placement", placement_path, "placement JSON from optimize")->required();
  CLI::App* sw = app.add_subcommand("sweep", "delay sweeps over backhaul rate or SBS cache size");
  add_common(sw);
  sw->add_option("--axis", axis, "backhaul_rate or sbs_cache_size")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (opt->count("--seed") || eval->count("--seed") || sw->count("--seed")) {
    overrides.seed = seed;
  }
  if (opt->count("--trials") || eval->count("--trials") || sw->count("--trials")) {
    overrides.trials = trials;
  }
  if (!mode.empty()) overrides.mode = mode;

  if (app.got_subcommand(opt)) {
    return svcache::cmd_optimize(config_path, out_dir, overrides, std::cout, std::cerr);
  }
  if (app.got_subcommand(eval)) {
    return svcache::cmd_evaluate(config_path, placement_path, out_dir, overrides, std::cout,
                                 std::cerr);
  }
  return svcache::cmd_sweep(config_path, axis, out_dir, overrides, std::cout, std::cerr);
}
