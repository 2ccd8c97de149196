// psgla command-line runner.
//
//   psgla <sample|converge|couple|constants|tune> --config PATH [--out DIR]
//         [--seed U64] [--threads N]
//
// Exit codes: 0 success, 2 configuration error, 3 numeric error,
// 4 statistical pass criterion unmet.

#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "psgla/config.h"
#include "psgla/errors.h"
#include "psgla/experiments.h"
#include "psgla/parallel.h"

int main(int argc, char** argv) {
  CLI::App app{"Projected stochastic gradient Langevin experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"sample", "run PSGLA chains and write trajectories"},
      {"converge", "W1 to the Gibbs measure across checkpoints"},
      {"couple", "coupled chains and the supermartingale check"},
      {"constants", "contraction and composite constants"},
      {"tune", "choose beta, T and eta for a target suboptimality"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config or manifest (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--threads", threads, "OpenMP threads (0 keeps the default)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : psgla::kExitConfig;
  }

  try {
    psgla::ExperimentConfig config = psgla::load_config(config_path);
    config.experiment = app.get_subcommands().front()->get_name();
    if (seed) config.seed = *seed;
    psgla::set_thread_count(threads);
    return psgla::run_experiment(config, out_dir);
  } catch (const psgla::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return psgla::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return psgla::kExitNumeric;
  }
}
