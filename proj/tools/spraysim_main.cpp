#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "spraysim/commands.hpp"
#include "spraysim/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string scenario;
  std::string seed_list;
  std::string out_dir;
  int jobs = -1;
  bool show_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--scenario", flags.scenario, "scenario name or manifest path");
  cmd->add_option("--seed", flags.seed_list, "seed or comma-separated seed list");
  cmd->add_option("--seeds", flags.seed_list, "alias for --seed");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--jobs", flags.jobs, "max parallel trials (default: processors)");
  cmd->add_flag("--show-config", flags.show_config,
                "print the effective config instead of running");
}

// Precedence: defaults < config file < flags.
spraysim::AppConfig effective_config(const CommonFlags& flags) {
  spraysim::AppConfig config = spraysim::default_config();
  if (!flags.config_path.empty())
    config = spraysim::load_config_file(flags.config_path, config);
  if (!flags.scenario.empty()) config.scenario = flags.scenario;
  if (!flags.seed_list.empty()) config.seeds = spraysim::parse_seed_list(flags.seed_list);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.jobs >= 0) config.jobs = flags.jobs;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spraysim - variable flow rate spraying simulator"};
  app.require_subcommand(0, 1);

  bool show_config = false;
  app.add_flag("--show-config", show_config, "print the effective config and exit");

  CommonFlags run_flags, compare_flags, calibrate_flags, show_flags;
  std::string run_mode = "variable";
  std::string calibrate_which;

  auto* run = app.add_subcommand("run", "run one trial of one control mode");
  add_common(run, run_flags);
  run->add_option("--mode", run_mode, "control mode: all | onoff | variable");

  auto* compare = app.add_subcommand("compare", "run the three-way comparison");
  add_common(compare, compare_flags);

  auto* calibrate = app.add_subcommand(
      "calibrate", "replicate a calibration sweep (pe1: coverage vs duty, "
                   "pe2: reach vs distance)");
  calibrate->add_option("which", calibrate_which, "pe1 | pe2")->required();
  add_common(calibrate, calibrate_flags);

  auto* show = app.add_subcommand("show-config", "print the effective config");
  add_common(show, show_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a config error
  }

  try {
    if (show_config && !app.get_subcommands().size()) {
      std::cout << spraysim::dump_config(effective_config(CommonFlags{}));
      return 0;
    }
    if (run->parsed()) {
      auto config = effective_config(run_flags);
      const auto mode = spraysim::control_mode_from_string(run_mode);
      if (show_config || run_flags.show_config) {
        std::cout << spraysim::dump_config(config);
        return 0;
      }
      const auto written = spraysim::cmd_run(config, mode, config.seeds.front());
      std::cout << "wrote " << written.size() << " artifacts under " << config.out_dir
                << "\n";
      return 0;
    }
    if (compare->parsed()) {
      auto config = effective_config(compare_flags);
      if (show_config || compare_flags.show_config) {
        std::cout << spraysim::dump_config(config);
        return 0;
      }
      const auto written = spraysim::cmd_compare(config);
      std::cout << "wrote " << written.size() << " artifacts under " << config.out_dir
                << "\n";
      return 0;
    }
    if (calibrate->parsed()) {
      auto config = effective_config(calibrate_flags);
      if (show_config || calibrate_flags.show_config) {
        std::cout << spraysim::dump_config(config);
        return 0;
      }
      const auto written = spraysim::cmd_calibrate(config, calibrate_which);
      std::cout << "wrote " << written.size() << " artifacts under " << config.out_dir
                << "\n";
      return 0;
    }
    if (show->parsed()) {
      std::cout << spraysim::dump_config(effective_config(show_flags));
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const spraysim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const spraysim::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}
