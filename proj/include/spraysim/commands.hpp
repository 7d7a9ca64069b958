#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spraysim/config.hpp"
#include "spraysim/harness.hpp"

namespace spraysim {

// Subcommand implementations shared by the CLI binary and the test suites.
// They throw ConfigError / ScenarioError / IoError; main() maps those to
// exit codes 1 / 2 / 3.

// Runs one trial and writes trial_summary.csv, papers.csv, flow_trace.csv,
// paper rasters and effective_config.json under out_dir.
std::vector<std::filesystem::path> cmd_run(const AppConfig& config,
                                           ControlMode mode,
                                           std::uint64_t seed);

// Runs the three-way comparison over config.seeds and writes report.csv,
// trials.csv, summary.json and effective_config.json under out_dir.
std::vector<std::filesystem::path> cmd_compare(const AppConfig& config);

// which: "pe1" | "pe2"; writes <which>_grid.csv and <which>_plot.csv.
std::vector<std::filesystem::path> cmd_calibrate(const AppConfig& config,
                                                 const std::string& which);

}  // namespace spraysim
