#pragma once

#include <string>

#include "psgla/config.h"
#include "psgla/types.h"

namespace psgla {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitStatistical = 4;

// Each command writes its outputs into out_dir (created if missing) and
// returns kExitOk, or kExitStatistical when its pass criterion is unmet.
// Library errors propagate as exceptions. Every numeric output embeds the
// resolved config; wall time goes to timing.json only, so the remaining files
// are byte-identical across reruns of the same config.
//
//   sample     terminal.csv, [trajectory.csv for a single chain], manifest.json
//   converge   checkpoints.csv, report.json, manifest.json
//   couple     report.json, coupling_times.csv, [distances.csv], manifest.json
//   constants  constants.json, manifest.json (constants.json is also printed)
//   tune       tune.json, [terminal.csv], manifest.json
int cmd_sample(const ExperimentConfig& config, const std::string& out_dir);
int cmd_converge(const ExperimentConfig& config, const std::string& out_dir);
int cmd_couple(const ExperimentConfig& config, const std::string& out_dir);
int cmd_constants(const ExperimentConfig& config, const std::string& out_dir);
int cmd_tune(const ExperimentConfig& config, const std::string& out_dir);

// Dispatches on config.experiment.
int run_experiment(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace psgla
