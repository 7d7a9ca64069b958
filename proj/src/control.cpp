#include "spraysim/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spraysim/errors.hpp"

namespace spraysim {

const char* to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::AllOpen: return "all";
    case ControlMode::OnOff: return "onoff";
    case ControlMode::VariableFlow: return "variable";
  }
  return "?";
}

ControlMode control_mode_from_string(std::string_view s) {
  if (s == "all") return ControlMode::AllOpen;
  if (s == "onoff") return ControlMode::OnOff;
  if (s == "variable") return ControlMode::VariableFlow;
  throw ConfigError("unknown mode '" + std::string(s) + "' (valid: all, onoff, variable)");
}

void ControllerConfig::validate() const {
  if (!(thres_nozzle >= 0.0 && thres_nozzle <= 1.0))
    throw ConfigError("thres_nozzle must be in [0,1]");
  if (!(k_p > 0.0)) throw ConfigError("k_p must be > 0");
  if (!(duty_floor > 0.0 && duty_floor < duty_ceiling && duty_ceiling <= 100.0))
    throw ConfigError("require 0 < duty_floor < duty_ceiling <= 100");
  if (!(near_distance_m > 0.0)) throw ConfigError("near_distance_m must be > 0");
  if (!std::isfinite(c_v)) throw ConfigError("c_v must be finite");
}

NozzleCommand all_open(const ZoneFeatures& f, const ControllerConfig& cfg) {
  NozzleCommand cmd;
  cmd.nozzle_index = f.zone_index;
  cmd.mode = ControlMode::AllOpen;
  cmd.duty = cfg.duty_ceiling;
  return cmd;
}

NozzleCommand on_off(const ZoneFeatures& f, const ControllerConfig& cfg) {
  NozzleCommand cmd;
  cmd.nozzle_index = f.zone_index;
  cmd.mode = ControlMode::OnOff;
  cmd.duty = f.a_p <= cfg.thres_nozzle ? 0.0 : cfg.duty_ceiling;
  return cmd;
}

NozzleCommand variable_rate(const ZoneFeatures& f, const ControllerConfig& cfg) {
  NozzleCommand cmd;
  cmd.nozzle_index = f.zone_index;
  cmd.mode = ControlMode::VariableFlow;

  if (cfg.variable_gate_by_threshold && f.a_p <= cfg.thres_nozzle) {
    cmd.duty = 0.0;
    return cmd;
  }
  if (!std::isfinite(f.d_c)) {
    // A gate-passing zone without a usable distance is inconsistent input;
    // keep the nozzle shut rather than spray blind.
    cmd.duty = 0.0;
    cmd.diagnostic = "non-finite d_c with a_p above threshold";
    return cmd;
  }
  if (f.d_c <= cfg.near_distance_m) {
    cmd.duty = cfg.duty_floor;
    return cmd;
  }
  const double raw = cfg.k_p * (f.a_p * 100.0) * f.d_c + cfg.c_v;
  cmd.duty = std::clamp(raw, cfg.duty_floor, cfg.duty_ceiling);
  return cmd;
}

std::vector<NozzleCommand> command_frame(const std::vector<ZoneFeatures>& zones,
                                         const ControllerConfig& cfg,
                                         std::uint64_t frame_id, int expected_zones) {
  if (static_cast<int>(zones.size()) != expected_zones)
    throw std::invalid_argument("zone count mismatch: got " +
                                std::to_string(zones.size()) + ", expected " +
                                std::to_string(expected_zones));
  std::vector<NozzleCommand> commands;
  commands.reserve(zones.size());
  for (const auto& z : zones) {
    NozzleCommand cmd;
    switch (cfg.mode) {
      case ControlMode::AllOpen: cmd = all_open(z, cfg); break;
      case ControlMode::OnOff: cmd = on_off(z, cfg); break;
      case ControlMode::VariableFlow: cmd = variable_rate(z, cfg); break;
    }
    cmd.frame_id = frame_id;
    commands.push_back(std::move(cmd));
  }
  return commands;
}

}  // namespace spraysim
