#include "spraysim/config.hpp"

#include <set>
#include <sstream>

#include "spraysim/errors.hpp"
#include "spraysim/fsio.hpp"

#include "json.hpp"

namespace spraysim {

using nlohmann::json;

void SimConfig::validate() const {
  if (!(dt_averaged_s > 0.0 && dt_waveform_s > 0.0))
    throw ConfigError("time steps must be > 0");
  if (!(pwm_frequency_hz > 0.0)) throw ConfigError("pwm_frequency_hz must be > 0");
  if (n_zones < 1) throw ConfigError("n_zones must be >= 1");
  if (!(max_depth_m > 0.0)) throw ConfigError("max_depth_m must be > 0");
  if (!(nt_bleed_tolerance_pct >= 0.0))
    throw ConfigError("nt_bleed_tolerance_pct must be >= 0");
}

void AppConfig::validate() const {
  controller.validate();
  valve.validate();
  plume.validate();
  sim.validate();
  if (!(calibration.exposure_s > 0.0))
    throw ConfigError("calibration exposure_s must be > 0");
  if (!(calibration.zone_span_m > 0.0))
    throw ConfigError("calibration zone_span_m must be > 0");
  if (calibration.pe1_papers < 1) throw ConfigError("pe1_papers must be >= 1");
  if (seeds.empty()) throw ConfigError("seed list must not be empty");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
}

AppConfig default_config() { return AppConfig{}; }

namespace {

const char* axis_name(SplitAxis a) { return a == SplitAxis::Width ? "width" : "height"; }
SplitAxis axis_from(const std::string& s) {
  if (s == "width") return SplitAxis::Width;
  if (s == "height") return SplitAxis::Height;
  throw ConfigError("unknown axis '" + s + "' (valid: width, height)");
}
const char* stat_name(DistanceStat s) {
  return s == DistanceStat::Median ? "median" : "mean";
}
DistanceStat stat_from(const std::string& s) {
  if (s == "median") return DistanceStat::Median;
  if (s == "mean") return DistanceStat::Mean;
  throw ConfigError("unknown distance_stat '" + s + "' (valid: median, mean)");
}

json to_json(const AppConfig& c) {
  json j;
  j["controller"] = {
      {"thres_nozzle", c.controller.thres_nozzle},
      {"k_p", c.controller.k_p},
      {"c_v", c.controller.c_v},
      {"duty_floor", c.controller.duty_floor},
      {"duty_ceiling", c.controller.duty_ceiling},
      {"near_distance_m", c.controller.near_distance_m},
      {"mode", to_string(c.controller.mode)},
      {"variable_gate_by_threshold", c.controller.variable_gate_by_threshold},
  };
  j["valve"] = {
      {"c_n", c.valve.c_n},
      {"a_n_m2", c.valve.a_n},
      {"p_n_pa", c.valve.p_n},
      {"rho_kg_m3", c.valve.rho},
      {"plunger_tau_s", c.valve.plunger_tau},
  };
  j["plume"] = {
      {"full_reach_m", c.plume.full_reach_m},
      {"min_reach_duty", c.plume.min_reach_duty},
      {"near_full_coverage_distance_m", c.plume.near_full_coverage_distance_m},
      {"full_coverage_duty", c.plume.full_coverage_duty},
      {"cone_half_angle_at_100_deg", c.plume.cone_half_angle_at_100_deg},
      {"cone_angle_exponent", c.plume.cone_angle_exponent},
      {"droplet_rate_per_l", c.plume.droplet_rate_per_l},
      {"rng_seed", c.plume.rng_seed},
  };
  j["sim"] = {
      {"dt_averaged_s", c.sim.dt_averaged_s},
      {"dt_waveform_s", c.sim.dt_waveform_s},
      {"pwm_mode", to_string(c.sim.pwm_mode)},
      {"pwm_frequency_hz", c.sim.pwm_frequency_hz},
      {"n_zones", c.sim.n_zones},
      {"axis", axis_name(c.sim.axis)},
      {"distance_stat", stat_name(c.sim.distance_stat)},
      {"max_depth_m", c.sim.max_depth_m},
      {"nt_bleed_tolerance_pct", c.sim.nt_bleed_tolerance_pct},
  };
  j["calibration"] = {
      {"exposure_s", c.calibration.exposure_s},
      {"zone_span_m", c.calibration.zone_span_m},
      {"pe1_distance_m", c.calibration.pe1_distance_m},
      {"pe1_papers", c.calibration.pe1_papers},
  };
  j["scenario"] = c.scenario;
  j["out_dir"] = c.out_dir;
  j["seeds"] = c.seeds;
  j["jobs"] = c.jobs;
  return j;
}

// Patch `target` from a JSON object, complaining about unknown keys so a
// typo never silently keeps a default.
template <typename Fn>
void patch_object(const json& j, const std::string& scope,
                  const std::set<std::string>& known, Fn&& apply) {
  if (!j.is_object())
    throw ConfigError("config section '" + scope + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key))
      throw ConfigError("unknown config key '" + scope + "." + key + "'");
    apply(key, value);
  }
}

void patch_config(AppConfig& c, const json& j) {
  static const std::set<std::string> top = {"controller", "valve",   "plume",
                                            "sim",        "calibration", "scenario",
                                            "out_dir",    "seeds",   "jobs"};
  for (const auto& [key, value] : j.items()) {
    if (!top.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  if (j.contains("controller"))
    patch_object(j["controller"], "controller",
                 {"thres_nozzle", "k_p", "c_v", "duty_floor", "duty_ceiling",
                  "near_distance_m", "mode", "variable_gate_by_threshold"},
                 [&](const std::string& k, const json& v) {
                   auto& t = c.controller;
                   if (k == "thres_nozzle") t.thres_nozzle = v.get<double>();
                   else if (k == "k_p") t.k_p = v.get<double>();
                   else if (k == "c_v") t.c_v = v.get<double>();
                   else if (k == "duty_floor") t.duty_floor = v.get<double>();
                   else if (k == "duty_ceiling") t.duty_ceiling = v.get<double>();
                   else if (k == "near_distance_m") t.near_distance_m = v.get<double>();
                   else if (k == "mode") t.mode = control_mode_from_string(v.get<std::string>());
                   else t.variable_gate_by_threshold = v.get<bool>();
                 });
  if (j.contains("valve"))
    patch_object(j["valve"], "valve",
                 {"c_n", "a_n_m2", "p_n_pa", "rho_kg_m3", "plunger_tau_s"},
                 [&](const std::string& k, const json& v) {
                   auto& t = c.valve;
                   if (k == "c_n") t.c_n = v.get<double>();
                   else if (k == "a_n_m2") t.a_n = v.get<double>();
                   else if (k == "p_n_pa") t.p_n = v.get<double>();
                   else if (k == "rho_kg_m3") t.rho = v.get<double>();
                   else t.plunger_tau = v.get<double>();
                 });
  if (j.contains("plume"))
    patch_object(j["plume"], "plume",
                 {"full_reach_m", "min_reach_duty", "near_full_coverage_distance_m",
                  "full_coverage_duty", "cone_half_angle_at_100_deg",
                  "cone_angle_exponent", "droplet_rate_per_l", "rng_seed"},
                 [&](const std::string& k, const json& v) {
                   auto& t = c.plume;
                   if (k == "full_reach_m") t.full_reach_m = v.get<double>();
                   else if (k == "min_reach_duty") t.min_reach_duty = v.get<double>();
                   else if (k == "near_full_coverage_distance_m")
                     t.near_full_coverage_distance_m = v.get<double>();
                   else if (k == "full_coverage_duty") t.full_coverage_duty = v.get<double>();
                   else if (k == "cone_half_angle_at_100_deg")
                     t.cone_half_angle_at_100_deg = v.get<double>();
                   else if (k == "cone_angle_exponent") t.cone_angle_exponent = v.get<double>();
                   else if (k == "droplet_rate_per_l") t.droplet_rate_per_l = v.get<double>();
                   else t.rng_seed = v.get<std::uint64_t>();
                 });
  if (j.contains("sim"))
    patch_object(j["sim"], "sim",
                 {"dt_averaged_s", "dt_waveform_s", "pwm_mode", "pwm_frequency_hz",
                  "n_zones", "axis", "distance_stat", "max_depth_m",
                  "nt_bleed_tolerance_pct"},
                 [&](const std::string& k, const json& v) {
                   auto& t = c.sim;
                   if (k == "dt_averaged_s") t.dt_averaged_s = v.get<double>();
                   else if (k == "dt_waveform_s") t.dt_waveform_s = v.get<double>();
                   else if (k == "pwm_mode") t.pwm_mode = pwm_mode_from_string(v.get<std::string>());
                   else if (k == "pwm_frequency_hz") t.pwm_frequency_hz = v.get<double>();
                   else if (k == "n_zones") t.n_zones = v.get<int>();
                   else if (k == "axis") t.axis = axis_from(v.get<std::string>());
                   else if (k == "distance_stat") t.distance_stat = stat_from(v.get<std::string>());
                   else if (k == "max_depth_m") t.max_depth_m = v.get<double>();
                   else t.nt_bleed_tolerance_pct = v.get<double>();
                 });
  if (j.contains("calibration"))
    patch_object(j["calibration"], "calibration",
                 {"exposure_s", "zone_span_m", "pe1_distance_m", "pe1_papers"},
                 [&](const std::string& k, const json& v) {
                   auto& t = c.calibration;
                   if (k == "exposure_s") t.exposure_s = v.get<double>();
                   else if (k == "zone_span_m") t.zone_span_m = v.get<double>();
                   else if (k == "pe1_distance_m") t.pe1_distance_m = v.get<double>();
                   else t.pe1_papers = v.get<int>();
                 });
  if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
}

}  // namespace

void apply_config_text(AppConfig& config, const std::string& json_text,
                       const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + origin + ": " + e.what());
  }
  try {
    patch_config(config, j);
  } catch (const json::exception& e) {
    throw ConfigError("config error in " + origin + ": " + e.what());
  }
}

AppConfig load_config_file(const std::filesystem::path& path, AppConfig base) {
  if (!std::filesystem::exists(path))
    throw ConfigError("config file not found: " + path.string());
  apply_config_text(base, read_file(path), path.string());
  return base;
}

std::string dump_config(const AppConfig& config) {
  return to_json(config).dump(2) + "\n";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ConfigError("empty entry in seed list '" + text + "'");
    if (item.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad seed '" + item + "' in seed list");
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "' in seed list");
    }
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

}  // namespace spraysim
