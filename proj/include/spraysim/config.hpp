#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spraysim/control.hpp"
#include "spraysim/spray.hpp"
#include "spraysim/valve.hpp"

namespace spraysim {

// Pipeline knobs shared by trials and calibration runs.
struct SimConfig {
  double dt_averaged_s = 0.01;
  double dt_waveform_s = 0.001;
  PwmMode pwm_mode = PwmMode::Averaged;
  double pwm_frequency_hz = 10.0;
  int n_zones = 4;
  SplitAxis axis = SplitAxis::Width;
  DistanceStat distance_stat = DistanceStat::Median;
  double max_depth_m = 2.0;
  // How many coverage points adjacent-zone plume bleed may put on papers
  // deep inside no-target zones; the suppression property tests use it.
  double nt_bleed_tolerance_pct = 5.0;

  double dt() const {
    return pwm_mode == PwmMode::Waveform ? dt_waveform_s : dt_averaged_s;
  }
  void validate() const;
};

// Effective configuration; precedence is defaults < config file < flags.
struct AppConfig {
  ControllerConfig controller;
  ValveParams valve;
  PlumeModel plume;
  SimConfig sim;
  CalibrationConfig calibration;

  std::string scenario = "naju_default";  // builtin name or manifest path
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds = {1};
  int jobs = 0;  // 0 = number of available processors

  void validate() const;
};

AppConfig default_config();

// Parses a JSON config file and patches it over `base`. Unknown keys are a
// ConfigError, so typos do not silently fall back to defaults.
AppConfig load_config_file(const std::filesystem::path& path, AppConfig base);
void apply_config_text(AppConfig& config, const std::string& json_text,
                       const std::string& origin);

// Canonical JSON dump; load_config_file(dump(c)) == c, byte for byte.
std::string dump_config(const AppConfig& config);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace spraysim
