#include "spraysim/spray.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "spraysim/errors.hpp"
#include "spraysim/raster.hpp"

namespace spraysim {

void PlumeModel::validate() const {
  if (!(full_reach_m > near_full_coverage_distance_m &&
        near_full_coverage_distance_m > 0.0))
    throw ConfigError("require full_reach_m > near_full_coverage_distance_m > 0");
  if (!(full_coverage_duty > 0.0 && full_coverage_duty <= 100.0))
    throw ConfigError("full_coverage_duty must be in (0,100]");
  if (!(min_reach_duty > 0.0 && min_reach_duty < 100.0))
    throw ConfigError("min_reach_duty must be in (0,100)");
  if (!(cone_half_angle_at_100_deg > 0.0 && cone_half_angle_at_100_deg < 90.0))
    throw ConfigError("cone_half_angle_at_100_deg must be in (0,90)");
  if (!(cone_angle_exponent > 0.0)) throw ConfigError("cone_angle_exponent must be > 0");
  if (!(droplet_rate_per_l > 0.0)) throw ConfigError("droplet_rate_per_l must be > 0");
}

double plume_reach(double duty, const PlumeModel& model) {
  if (duty < model.min_reach_duty)
    throw std::invalid_argument("plume_reach: duty below the actuation floor");
  if (duty >= 100.0) return model.full_reach_m;
  if (duty <= model.min_reach_duty) return model.near_full_coverage_distance_m;
  const double f = (duty - model.min_reach_duty) / (100.0 - model.min_reach_duty);
  return model.near_full_coverage_distance_m +
         f * (model.full_reach_m - model.near_full_coverage_distance_m);
}

double cone_half_angle(double duty, const PlumeModel& model) {
  const double f = std::min(1.0, duty / model.full_coverage_duty);
  return model.cone_half_angle_at_100_deg * std::numbers::pi / 180.0 *
         std::pow(f, model.cone_angle_exponent);
}

std::size_t WaterSensitivePaper::stained_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : stained) n += v ? 1 : 0;
  return n;
}

double adhesion_rate(const WaterSensitivePaper& paper) {
  if (paper.rows < 1 || paper.cols < 1 ||
      paper.stained.size() != static_cast<std::size_t>(paper.rows) * paper.cols)
    throw std::invalid_argument("adhesion_rate: zero-area or inconsistent raster");
  return 100.0 * static_cast<double>(paper.stained_count()) /
         (static_cast<double>(paper.rows) * static_cast<double>(paper.cols));
}

Depositor::Depositor(const PlumeModel& model, int n_nozzles, double boom_span_m,
                     std::uint64_t seed)
    : model_(model), n_nozzles_(n_nozzles), boom_span_m_(boom_span_m) {
  if (n_nozzles < 1) throw ConfigError("depositor needs at least one nozzle");
  if (!(boom_span_m > 0.0)) throw ConfigError("boom_span_m must be > 0");
  model_.validate();
  streams_.reserve(static_cast<std::size_t>(n_nozzles));
  for (int i = 0; i < n_nozzles; ++i)
    streams_.emplace_back(mix_seed(seed, static_cast<std::uint64_t>(i)));
  emit_acc_.assign(static_cast<std::size_t>(n_nozzles), 0.0);
  field_.zone_emitted_l.assign(static_cast<std::size_t>(n_nozzles), 0.0);
}

double Depositor::nozzle_boom_center(int nozzle) const {
  return boom_span_m_ / n_nozzles_ * (nozzle + 0.5);
}

void Depositor::attach_papers(std::vector<WaterSensitivePaper> papers) {
  for (const auto& p : papers) {
    if (!(p.distance_m > 0.0) || p.distance_m > model_.full_reach_m)
      throw ConfigError("paper outside the simulated spray volume (distance " +
                        std::to_string(p.distance_m) + " m, reach limit " +
                        std::to_string(model_.full_reach_m) + " m)");
    if (!std::isfinite(p.offset_m) || !std::isfinite(p.boom_m))
      throw ConfigError("paper placement must be finite");
  }
  field_.papers = std::move(papers);
  // Nearest paper wins once a droplet lands on it, so keep distance order.
  std::stable_sort(field_.papers.begin(), field_.papers.end(),
                   [](const auto& a, const auto& b) { return a.distance_m < b.distance_m; });
  candidate_radius_ = std::tan(cone_half_angle(100.0, model_));
}

bool Depositor::any_candidate(int nozzle, double s_m) const {
  const double boom = nozzle_boom_center(nozzle);
  for (const auto& p : field_.papers) {
    if (p.distance_m > model_.full_reach_m) continue;
    const double win = p.distance_m * candidate_radius_;
    if (std::abs(p.offset_m - s_m) <= win + 0.5 * p.width_m() &&
        std::abs(p.boom_m - boom) <= win + 0.5 * p.height_m())
      return true;
  }
  return false;
}

void Depositor::stamp_droplets(int nozzle, double s_m, double duty, int count) {
  const double reach = plume_reach(duty, model_);
  const double tan_theta = std::tan(cone_half_angle(duty, model_));
  const double boom = nozzle_boom_center(nozzle);
  Rng& rng = streams_[static_cast<std::size_t>(nozzle)];

  for (int k = 0; k < count; ++k) {
    const std::uint64_t bits = rng.next_u64();
    const double u1 = static_cast<double>(bits >> 32) * 0x1.0p-32;
    const double u2 = static_cast<double>(bits & 0xffffffffULL) * 0x1.0p-32;
    // Radial density decreasing linearly toward the cone rim.
    const double rho = 1.0 - std::sqrt(1.0 - u1);
    const double psi = 2.0 * std::numbers::pi * u2;
    const double cs = std::cos(psi);
    const double sn = std::sin(psi);

    for (auto& p : field_.papers) {
      if (p.distance_m > reach) break;  // papers are distance-sorted
      const double r = p.distance_m * tan_theta * rho;
      const double ds = s_m + r * cs - (p.offset_m - 0.5 * p.width_m());
      if (ds < 0.0 || ds >= p.width_m()) continue;
      const double db = boom + r * sn - (p.boom_m - 0.5 * p.height_m());
      if (db < 0.0 || db >= p.height_m()) continue;
      const int row = static_cast<int>(ds * 1000.0);
      const int col = static_cast<int>(db * 1000.0);
      if (row >= p.rows || col >= p.cols) continue;
      p.stained[static_cast<std::size_t>(row) * p.cols + col] = 1;
      ++field_.droplets_deposited;
      break;
    }
  }
}

void Depositor::step(double s_m, std::span<const double> duty,
                     std::span<const double> flow_m3s, double dt) {
  if (static_cast<int>(duty.size()) != n_nozzles_ ||
      static_cast<int>(flow_m3s.size()) != n_nozzles_)
    throw std::invalid_argument("depositor step misaligned with nozzle count");

  for (int i = 0; i < n_nozzles_; ++i) {
    const double liters = flow_m3s[i] * 1000.0 * dt;
    field_.zone_emitted_l[static_cast<std::size_t>(i)] += liters;
    emit_acc_[static_cast<std::size_t>(i)] += liters * model_.droplet_rate_per_l;
    const double whole = std::floor(emit_acc_[static_cast<std::size_t>(i)]);
    emit_acc_[static_cast<std::size_t>(i)] -= whole;
    const auto n = static_cast<std::uint64_t>(whole);
    if (n == 0) continue;
    field_.droplets_emitted += n;
    // Below the actuation floor the plume has collapsed; residual flow
    // during plunger decay contributes volume but no stains.
    if (duty[i] < model_.min_reach_duty) continue;
    if (!any_candidate(i, s_m)) continue;
    stamp_droplets(i, s_m, duty[i], static_cast<int>(n));
  }
}

void Depositor::expose_stationary(int nozzle, double duty, double flow_m3s,
                                  double duration_s) {
  if (nozzle < 0 || nozzle >= n_nozzles_)
    throw std::invalid_argument("expose_stationary: nozzle out of range");
  const double liters = flow_m3s * 1000.0 * duration_s;
  field_.zone_emitted_l[static_cast<std::size_t>(nozzle)] += liters;
  emit_acc_[static_cast<std::size_t>(nozzle)] += liters * model_.droplet_rate_per_l;
  const double whole = std::floor(emit_acc_[static_cast<std::size_t>(nozzle)]);
  emit_acc_[static_cast<std::size_t>(nozzle)] -= whole;
  const auto n = static_cast<std::uint64_t>(whole);
  if (n == 0) return;
  field_.droplets_emitted += n;
  if (duty < model_.min_reach_duty) return;
  // Chunked so extremely long exposures cannot overflow the int count.
  std::uint64_t left = n;
  while (left > 0) {
    const auto chunk = static_cast<int>(std::min<std::uint64_t>(left, 1u << 30));
    stamp_droplets(nozzle, 0.0, duty, chunk);
    left -= static_cast<std::uint64_t>(chunk);
  }
}

DepositionField Depositor::take_field() { return std::move(field_); }

DepositionField deposit(const std::vector<std::vector<NozzleCommand>>& commands,
                        std::vector<WaterSensitivePaper> papers,
                        const PlumeModel& model, const ValveParams& valve,
                        double dt, double pwm_frequency_hz, PwmMode pwm_mode) {
  if (commands.empty()) {
    DepositionField field;
    field.papers = std::move(papers);
    return field;
  }
  const int n = static_cast<int>(commands.front().size());
  ValveBank bank(n, valve, pwm_mode, pwm_frequency_hz);
  Depositor depositor(model, n, 0.32 * n, model.rng_seed);
  depositor.attach_papers(std::move(papers));

  std::vector<double> duties(static_cast<std::size_t>(n));
  for (const auto& step : commands) {
    if (static_cast<int>(step.size()) != n)
      throw std::invalid_argument("command stream misaligned across steps");
    for (int i = 0; i < n; ++i) duties[static_cast<std::size_t>(i)] = step[static_cast<std::size_t>(i)].duty;
    bank.step(duties, dt);
    depositor.step(0.0, duties, bank.flows(), dt);
  }
  return depositor.take_field();
}

namespace {

CoverageCell summarize_cell(double duty, double x,
                            const std::vector<WaterSensitivePaper>& papers) {
  CoverageCell cell;
  cell.duty = duty;
  cell.x = x;
  const auto n = static_cast<double>(papers.size());
  double sum = 0.0;
  for (const auto& p : papers) sum += adhesion_rate(p);
  cell.mean_rp = sum / n;
  if (papers.size() > 1) {
    double ss = 0.0;
    for (const auto& p : papers) {
      const double d = adhesion_rate(p) - cell.mean_rp;
      ss += d * d;
    }
    cell.sd_rp = std::sqrt(ss / (n - 1.0));
  }
  return cell;
}

}  // namespace

std::vector<CoverageCell> replicate_pe1(const PlumeModel& model,
                                        const ValveParams& valve,
                                        const CalibrationConfig& cal) {
  model.validate();
  valve.validate();
  std::vector<CoverageCell> cells;
  std::uint64_t cell_index = 0;
  for (double duty = cal.duty_min; duty <= cal.duty_max + 1e-9; duty += cal.duty_step) {
    for (int area = 30; area <= 100; area += 10) {
      Depositor depositor(model, 1, 2.0 * cal.zone_span_m,
                          mix_seed(model.rng_seed, 0x9e100 + cell_index++));
      const double center = depositor.nozzle_boom_center(0);
      const double extent = cal.zone_span_m * area / 100.0;
      std::vector<WaterSensitivePaper> papers;
      for (int k = 0; k < cal.pe1_papers; ++k) {
        const double boom =
            center + extent * ((k + 0.5) / cal.pe1_papers - 0.5);
        WaterSensitivePaper paper(0, cal.pe1_distance_m, 0.0, boom, "pe1");
        paper.id = k;
        // Papers share one plane, so overlap would shadow later papers.
        if (extent / cal.pe1_papers < paper.height_m())
          throw ConfigError(
              "pe1 papers overlap: raise zone_span_m or lower pe1_papers");
        papers.push_back(std::move(paper));
      }
      depositor.attach_papers(std::move(papers));
      depositor.expose_stationary(0, duty, steady_flow(duty, valve), cal.exposure_s);
      cells.push_back(summarize_cell(duty, area, depositor.take_field().papers));
    }
  }
  return cells;
}

std::vector<CoverageCell> replicate_pe2(const PlumeModel& model,
                                        const ValveParams& valve,
                                        const CalibrationConfig& cal) {
  model.validate();
  valve.validate();
  std::vector<CoverageCell> cells;
  std::uint64_t cell_index = 0;
  for (double duty = cal.duty_min; duty <= cal.duty_max + 1e-9; duty += cal.duty_step) {
    for (int di = 0; di < 4; ++di) {
      const double distance = (7.0 + 3.0 * di) / 10.0;  // exactly 0.7, 1.0, 1.3, 1.6
      Depositor depositor(model, 1, 2.0 * cal.zone_span_m,
                          mix_seed(model.rng_seed, 0x9e200 + cell_index++));
      std::vector<WaterSensitivePaper> papers;
      papers.emplace_back(0, distance, 0.0, depositor.nozzle_boom_center(0), "pe2");
      depositor.attach_papers(std::move(papers));
      depositor.expose_stationary(0, duty, steady_flow(duty, valve), cal.exposure_s);
      cells.push_back(summarize_cell(duty, distance, depositor.take_field().papers));
    }
  }
  return cells;
}

void write_coverage_csv(std::ostream& os, const std::vector<CoverageCell>& cells) {
  os << "duty,area_or_distance,mean_rp,sd_rp\n";
  char buf[96];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%.1f,%.2f,%.4f,%.4f\n", c.duty, c.x, c.mean_rp,
                  c.sd_rp);
    os << buf;
  }
}

void save_paper_raster(const WaterSensitivePaper& paper,
                       const std::filesystem::path& path) {
  // Stored in the SEGMASK1 container: width = boom axis, height = row axis.
  std::vector<std::uint8_t> px(paper.stained.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = paper.stained[i] ? 1 : 0;
  save_stain_raster(px, paper.cols, paper.rows, path);
}

}  // namespace spraysim
