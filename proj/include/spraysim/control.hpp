#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spraysim/perception.hpp"

namespace spraysim {

enum class ControlMode { AllOpen, OnOff, VariableFlow };

const char* to_string(ControlMode mode);                    // "all" | "onoff" | "variable"
ControlMode control_mode_from_string(std::string_view s);   // throws ConfigError

struct ControllerConfig {
  double thres_nozzle = 0.10;   // area-fraction spray gate
  double k_p = 0.8;             // proportional constant
  double c_v = 0.0;             // dead-zone offset, duty percentage points
  double duty_floor = 75.0;     // valve does not actuate below this duty
  double duty_ceiling = 100.0;
  double near_distance_m = 0.9; // at or below: minimum spraying amount
  ControlMode mode = ControlMode::VariableFlow;
  bool variable_gate_by_threshold = true;

  void validate() const;  // throws ConfigError
};

// Unit convention for the variable law: a_p enters as a percentage (0..100),
// d_c in meters; k_p * a_p% * d_c + c_v is a duty percentage, clamped to
// [duty_floor, duty_ceiling].
struct NozzleCommand {
  int nozzle_index = 0;
  double duty = 0.0;  // percent; 0 exactly when off, else within the clamp band
  ControlMode mode = ControlMode::AllOpen;
  std::uint64_t frame_id = 0;
  std::string diagnostic;  // non-empty when features were inconsistent
};

NozzleCommand all_open(const ZoneFeatures& f, const ControllerConfig& cfg);
NozzleCommand on_off(const ZoneFeatures& f, const ControllerConfig& cfg);
NozzleCommand variable_rate(const ZoneFeatures& f, const ControllerConfig& cfg);

// Applies cfg.mode to each zone; one command per nozzle.
std::vector<NozzleCommand> command_frame(const std::vector<ZoneFeatures>& zones,
                                         const ControllerConfig& cfg,
                                         std::uint64_t frame_id,
                                         int expected_zones = 4);

}  // namespace spraysim
