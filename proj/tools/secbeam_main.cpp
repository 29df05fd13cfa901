// Command-line front end: run an experiment, check a config, print the version.

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "secbeam/harness.hpp"

int main(int argc, char** argv) {
  using namespace secbeam;
  CLI::App app{"Artificial-noise-aided secure beamforming for a DFRC base station"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment and write its CSVs and manifest");
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  bool paper_scale = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  run->add_option("--experiment", experiment, "fig2, fig3, fig4, fig5 or custom")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "custom"}));
  run->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--paper-scale", paper_scale, "N = 18, K = 4, at least 50 trials");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("validate-config", "Parse and validate a config file");
  std::string check_path;
  check->add_option("path", check_path, "Config file")->required()->check(CLI::ExistingFile);

  app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("version")) {
      std::cout << "secbeam " << kVersion << '\n';
      return 0;
    }
    if (app.got_subcommand("validate-config")) {
      const auto cfg = load_config(check_path);
      std::cout << cfg.canonical() << "config_hash = " << cfg.hash() << '\n';
      return 0;
    }
    auto cfg = load_config(config_path);
    cfg.experiment = parse_experiment(experiment);
    if (*seed_opt) cfg.seed = seed;
    if (paper_scale) apply_paper_scale(cfg);
    cfg.validate();
    const auto summary = run_experiment(cfg, out_dir, jobs);
    int bad = 0;
    for (const auto& r : summary.trials) bad += r.status != "ok";
    std::cout << to_string(cfg.experiment) << ": " << summary.trials.size() << " designs (" << bad
              << " infeasible or failed) in " << summary.wall_seconds << " s\n";
    for (const auto& f : summary.files) std::cout << "  " << f.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
