#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "spraysim/errors.hpp"
#include "spraysim/harness.hpp"

namespace spraysim {

TrialResult run_trial(const Scenario& scenario, ControlMode mode,
                      const AppConfig& config, std::uint64_t seed,
                      bool keep_trace) {
  config.validate();
  validate_scenario(scenario, config);

  ControllerConfig controller = config.controller;
  controller.mode = mode;

  const int n_zones = config.sim.n_zones;
  const double dt = config.sim.dt();
  const double duration = scenario.duration_s();
  const int n_frames = scenario.frame_count();
  if (n_frames < 1) throw ScenarioError("scenario has no frames");

  ValveBank bank(n_zones, config.valve, config.sim.pwm_mode,
                 config.sim.pwm_frequency_hz);

  PlumeModel plume = config.plume;
  plume.rng_seed = seed;
  Depositor depositor(plume, n_zones, scenario.boom_span_m, seed);
  {
    std::vector<WaterSensitivePaper> papers;
    papers.reserve(scenario.papers.size());
    for (std::size_t i = 0; i < scenario.papers.size(); ++i) {
      const auto& placement = scenario.papers[i];
      WaterSensitivePaper paper(placement.nozzle_zone, placement.distance_m,
                                placement.row_pos_m,
                                scenario.boom_span_m / n_zones *
                                    (placement.nozzle_zone + 0.5),
                                to_string(placement.tag));
      paper.id = static_cast<int>(i);
      papers.push_back(std::move(paper));
    }
    depositor.attach_papers(std::move(papers));
  }

  TrialResult result;
  result.mode = mode;
  result.seed = seed;

  SegmentedFrame seg;
  DepthFrame depth;
  std::vector<double> duties(static_cast<std::size_t>(n_zones), 0.0);
  const auto n_steps = static_cast<long>(std::llround(duration / dt));
  int frame_index = -1;

  for (long step = 0; step < n_steps; ++step) {
    const double t = step * dt;
    bool frame_due = frame_index < 0;
    while (frame_index + 1 < n_frames &&
           scenario.frame_time_s(frame_index + 1) <= t + 1e-9) {
      ++frame_index;
      frame_due = true;
    }
    if (frame_index < 0) frame_index = 0;  // first frame timestamped late
    if (frame_due) {
      if (scenario.generator) {
        synthesize_frame(scenario, frame_index, seg, depth);
      } else {
        const auto& ref = scenario.frame_files.at(static_cast<std::size_t>(frame_index));
        seg = load_mask(scenario.base_dir / ref.mask_path);
        depth = load_depth(scenario.base_dir / ref.depth_path);
        seg.frame_id = static_cast<std::uint64_t>(frame_index);
      }
      const auto features =
          frame_features(seg, depth, scenario.v_p, n_zones, config.sim.axis,
                         config.sim.distance_stat, config.sim.max_depth_m);
      const auto commands = command_frame(features, controller,
                                          static_cast<std::uint64_t>(frame_index),
                                          n_zones);
      for (int i = 0; i < n_zones; ++i)
        duties[static_cast<std::size_t>(i)] = commands[static_cast<std::size_t>(i)].duty;
    }

    bank.step(duties, dt);
    const double s_mid = scenario.v_p * (t + dt / 2.0);
    depositor.step(s_mid, duties, bank.flows(), dt);

    if (keep_trace) {
      for (int i = 0; i < n_zones; ++i) {
        FlowSample s;
        s.t = bank.t();
        s.nozzle = i;
        s.duty = duties[static_cast<std::size_t>(i)];
        s.x_n = bank.states()[static_cast<std::size_t>(i)].x_n;
        s.q_n = bank.flows()[static_cast<std::size_t>(i)];
        s.q_total = bank.q_total();
        s.volume_accum_l = bank.volume_l();
        result.trace.push_back(s);
      }
    }
  }

  result.volume_l = bank.volume_l();
  result.field = depositor.take_field();

  std::vector<const WaterSensitivePaper*> by_id(result.field.papers.size());
  for (const auto& p : result.field.papers)
    by_id.at(static_cast<std::size_t>(p.id)) = &p;
  for (const auto* p : by_id) {
    PaperResult pr;
    pr.paper_index = p->id;
    pr.tag = zone_tag_from_string(p->tag);
    pr.rp = adhesion_rate(*p);
    result.papers.push_back(pr);
  }
  return result;
}

TagStats summarize_values(const std::vector<double>& values) {
  TagStats stats;
  stats.n = static_cast<int>(values.size());
  if (values.empty()) return stats;
  double sum = 0.0;
  stats.max = values.front();
  stats.min = values.front();
  for (double v : values) {
    sum += v;
    stats.max = std::max(stats.max, v);
    stats.min = std::min(stats.min, v);
  }
  stats.mean = sum / stats.n;
  if (stats.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.sd = std::sqrt(ss / (stats.n - 1));
  }
  return stats;
}

const ModeReport& Report::mode(ControlMode m) const {
  for (const auto& r : modes)
    if (r.mode == m) return r;
  throw std::out_of_range("mode not present in report");
}

bool Report::self_consistent(double tol) const {
  if (raw_target.size() != modes.size() || raw_no_target.size() != modes.size())
    return false;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const TagStats t = summarize_values(raw_target[i]);
    const TagStats nt = summarize_values(raw_no_target[i]);
    auto close = [&](const TagStats& a, const TagStats& b) {
      return a.n == b.n && std::abs(a.mean - b.mean) <= tol &&
             std::abs(a.sd - b.sd) <= tol && std::abs(a.max - b.max) <= tol &&
             std::abs(a.min - b.min) <= tol;
    };
    if (!close(t, modes[i].target) || !close(nt, modes[i].no_target)) return false;
  }
  return true;
}

Report summarize(const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw std::invalid_argument("summarize: no trials");

  Report report;
  for (ControlMode mode :
       {ControlMode::AllOpen, ControlMode::OnOff, ControlMode::VariableFlow}) {
    std::vector<double> t_values, nt_values, volumes;
    for (const auto& trial : trials) {
      if (trial.mode != mode) continue;
      volumes.push_back(trial.volume_l);
      for (const auto& p : trial.papers)
        (p.tag == ZoneTag::Target ? t_values : nt_values).push_back(p.rp);
    }
    if (volumes.empty()) continue;

    ModeReport mr;
    mr.mode = mode;
    mr.target = summarize_values(t_values);
    mr.no_target = summarize_values(nt_values);
    double vsum = 0.0;
    for (double v : volumes) vsum += v;
    mr.volume_l = vsum / static_cast<double>(volumes.size());
    report.modes.push_back(mr);
    report.raw_target.push_back(std::move(t_values));
    report.raw_no_target.push_back(std::move(nt_values));
  }

  const auto all_open =
      std::find_if(report.modes.begin(), report.modes.end(),
                   [](const ModeReport& r) { return r.mode == ControlMode::AllOpen; });
  if (all_open != report.modes.end() && all_open->volume_l > 0.0) {
    for (auto& r : report.modes)
      r.reduction_pct = 100.0 * (1.0 - r.volume_l / all_open->volume_l);
    all_open->reduction_pct = 0.0;
  }
  return report;
}

Report compare_controls(const Scenario& scenario,
                        const std::vector<std::uint64_t>& seeds,
                        const AppConfig& config, int jobs,
                        std::vector<TrialResult>* trials_out) {
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  validate_scenario(scenario, config);

  struct Task {
    ControlMode mode;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::uint64_t seed : seeds)
    for (ControlMode mode :
         {ControlMode::AllOpen, ControlMode::OnOff, ControlMode::VariableFlow})
      tasks.push_back({mode, seed});

  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(tasks.size()));

  std::vector<TrialResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      results[i] = run_trial(scenario, tasks[i].mode, config, tasks[i].seed);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  const Report report = summarize(results);
  if (trials_out) *trials_out = std::move(results);
  return report;
}

void write_report_csv(std::ostream& os, const Report& report) {
  os << "mode,tag,mean,sd,max,min,volume_l,reduction_pct\n";
  char buf[160];
  for (const auto& r : report.modes) {
    for (const auto* pair : {&r.target, &r.no_target}) {
      const char* tag = pair == &r.target ? "T" : "NT";
      std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                    to_string(r.mode), tag, pair->mean, pair->sd, pair->max,
                    pair->min, r.volume_l, r.reduction_pct);
      os << buf;
    }
  }
}

void write_trials_csv(std::ostream& os, const std::vector<TrialResult>& trials) {
  os << "mode,seed,paper_index,tag,rp\n";
  char buf[96];
  for (const auto& trial : trials) {
    for (const auto& p : trial.papers) {
      std::snprintf(buf, sizeof(buf), "%s,%llu,%d,%s,%.4f\n", to_string(trial.mode),
                    static_cast<unsigned long long>(trial.seed), p.paper_index,
                    to_string(p.tag), p.rp);
      os << buf;
    }
  }
}

}  // namespace spraysim
