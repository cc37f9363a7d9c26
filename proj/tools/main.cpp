// ratiolab: train implicit models against density-ratio critics, estimate
// ratios between sample sources, and audit the loss registry.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ratiolab/commands.hpp"
#include "ratiolab/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"likelihood-free learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    CLI::Option* cfg_opt = cmd->add_option("--config", config_path, "run configuration file");
    if (config_required) cfg_opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--seed", seed, "training seed (overrides train.seed)")
        ->each([&seed_set](const std::string&) { seed_set = true; });
  };

  CLI::App* train = app.add_subcommand("train", "adversarial training run");
  CLI::App* estimate =
      app.add_subcommand("estimate-ratio", "density-ratio fit between two sample sources");
  CLI::App* curves = app.add_subcommand("curves", "loss-landscape curve table (CSV + SVG)");
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference audit of registered losses");
  CLI::App* benchmark = app.add_subcommand("benchmark", "full acceptance suite");
  add_common(train, true);
  add_common(estimate, true);
  add_common(curves, false);
  add_common(gradcheck, false);
  add_common(benchmark, false);

  CLI11_PARSE(app, argc, argv);

  try {
    ratiolab::RunConfig cfg;
    if (!config_path.empty()) cfg = ratiolab::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) cfg.train.seed = seed;

    const std::string command = app.get_subcommands().front()->get_name();
    return ratiolab::run_command(command, cfg, argv[0]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
