// Command-line experiment runner.
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "fpfc/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Clustered federated learning simulator"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string algorithm;
  std::string tuning;
  bool quiet = false;

  app.add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  app.add_option("--seed", seed, "Replace the first configured seed");
  app.add_option("--out-dir", out_dir, "Output directory (else config, else $FPFC_OUT_DIR)");
  app.add_option("--algorithm", algorithm, "fpfc | fpfc-l1 | async-fpfc | fedavg | local");
  app.add_option("--tuning", tuning, "Lambda selection mode")
      ->check(CLI::IsMember({"fixed", "warmup", "grid"}));
  app.add_flag("--quiet", quiet, "Suppress progress and the summary table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    fpfc::ExperimentConfig cfg = fpfc::load_config(config_path);
    if (seed) cfg.seeds.front() = *seed;
    if (!algorithm.empty()) cfg.algorithm = fpfc::parse_algorithm(algorithm);
    if (!tuning.empty()) cfg.tuning = fpfc::parse_tuning_mode(tuning);
    if (!out_dir.empty()) {
      cfg.out_dir = out_dir;
    } else if (!cfg.out_dir_from_config) {
      if (const char* env = std::getenv("FPFC_OUT_DIR"); env && *env) cfg.out_dir = env;
    }
    cfg.validate();

    const fpfc::RunReport report = fpfc::run_experiment(cfg, quiet);
    if (!quiet) {
      std::cout << fpfc::format_summary_table(cfg, report);
      std::cout << "outputs written to " << cfg.out_dir.string() << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fpfc::exit_code_for(e);
  }
}
