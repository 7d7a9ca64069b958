#include "spraysim/commands.hpp"

#include <cstdio>
#include <sstream>

#include "spraysim/errors.hpp"
#include "spraysim/fsio.hpp"

#include "json.hpp"

namespace spraysim {

namespace {

namespace fs = std::filesystem;

fs::path write(const fs::path& path, const std::string& content,
               std::vector<fs::path>& written) {
  atomic_write_file(path, content);
  written.push_back(path);
  return path;
}

std::string trial_summary_csv(const TrialResult& trial) {
  const Report report = summarize({trial});
  std::ostringstream os;
  write_report_csv(os, report);
  return os.str();
}

std::string papers_csv(const Scenario& scenario, const TrialResult& trial) {
  std::ostringstream os;
  os << "paper_index,tag,nozzle_zone,distance_m,row_pos_m,rp\n";
  char buf[128];
  for (const auto& p : trial.papers) {
    const auto& placement = scenario.papers.at(static_cast<std::size_t>(p.paper_index));
    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.4f,%.4f,%.4f\n", p.paper_index,
                  to_string(p.tag), placement.nozzle_zone, placement.distance_m,
                  placement.row_pos_m, p.rp);
    os << buf;
  }
  return os.str();
}

nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  j["modes"] = nlohmann::json::array();
  for (const auto& r : report.modes) {
    auto stats = [](const TagStats& s) {
      return nlohmann::json{{"mean", s.mean}, {"sd", s.sd},   {"max", s.max},
                            {"min", s.min},   {"n", s.n}};
    };
    j["modes"].push_back({{"mode", to_string(r.mode)},
                          {"target", stats(r.target)},
                          {"no_target", stats(r.no_target)},
                          {"volume_l", r.volume_l},
                          {"reduction_pct", r.reduction_pct}});
  }
  return j;
}

}  // namespace

std::vector<fs::path> cmd_run(const AppConfig& config, ControlMode mode,
                              std::uint64_t seed) {
  config.validate();
  const Scenario scenario = resolve_scenario(config.scenario);
  const TrialResult trial = run_trial(scenario, mode, config, seed, true);

  std::vector<fs::path> written;
  const fs::path out = config.out_dir;
  write(out / "effective_config.json", dump_config(config), written);
  write(out / "trial_summary.csv", trial_summary_csv(trial), written);
  write(out / "papers.csv", papers_csv(scenario, trial), written);
  {
    std::ostringstream os;
    write_flow_trace_csv(os, trial.trace);
    write(out / "flow_trace.csv", os.str(), written);
  }
  for (const auto& paper : trial.field.papers) {
    char name[64];
    std::snprintf(name, sizeof(name), "paper_%02d_%s.sm1", paper.id,
                  paper.tag.c_str());
    save_paper_raster(paper, out / "rasters" / name);
    written.push_back(out / "rasters" / name);
  }
  return written;
}

std::vector<fs::path> cmd_compare(const AppConfig& config) {
  config.validate();
  const Scenario scenario = resolve_scenario(config.scenario);
  std::vector<TrialResult> trials;
  const Report report =
      compare_controls(scenario, config.seeds, config, config.jobs, &trials);

  std::vector<fs::path> written;
  const fs::path out = config.out_dir;
  write(out / "effective_config.json", dump_config(config), written);
  {
    std::ostringstream os;
    write_report_csv(os, report);
    write(out / "report.csv", os.str(), written);
  }
  {
    std::ostringstream os;
    write_trials_csv(os, trials);
    write(out / "trials.csv", os.str(), written);
  }
  write(out / "summary.json", report_to_json(report).dump(2) + "\n", written);
  return written;
}

std::vector<fs::path> cmd_calibrate(const AppConfig& config,
                                    const std::string& which) {
  config.validate();
  if (which != "pe1" && which != "pe2")
    throw ConfigError("unknown calibration '" + which + "' (valid: pe1, pe2)");

  const auto cells = which == "pe1"
                         ? replicate_pe1(config.plume, config.valve, config.calibration)
                         : replicate_pe2(config.plume, config.valve, config.calibration);

  std::vector<fs::path> written;
  const fs::path out = config.out_dir;
  {
    std::ostringstream os;
    write_coverage_csv(os, cells);
    write(out / (which + "_grid.csv"), os.str(), written);
  }
  {
    // Plot series: one x,y line per duty curve.
    std::ostringstream os;
    os << "duty,x,mean_rp\n";
    char buf[96];
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof(buf), "%.1f,%.2f,%.4f\n", c.duty, c.x, c.mean_rp);
      os << buf;
    }
    write(out / (which + "_plot.csv"), os.str(), written);
  }
  return written;
}

}  // namespace spraysim
