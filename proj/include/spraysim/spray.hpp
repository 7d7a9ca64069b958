#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spraysim/rng.hpp"
#include "spraysim/valve.hpp"

namespace spraysim {

// Parametric plume reconstruction anchored at the calibration findings:
// minimum reach at the duty floor, full reach at duty 100, and full angular
// coverage from full_coverage_duty upward.
struct PlumeModel {
  double full_reach_m = 1.6;                  // reach at duty 100
  double min_reach_duty = 75.0;               // duty anchor for the minimum reach
  double near_full_coverage_distance_m = 0.9; // reach at min_reach_duty
  double full_coverage_duty = 90.0;           // cone stops widening here
  double cone_half_angle_at_100_deg = 14.0;
  double cone_angle_exponent = 3.0;           // shape of the angle falloff below full_coverage_duty
  double droplet_rate_per_l = 5e5;            // Monte Carlo resolution
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// Linear interpolation between the two reach anchors, clamped outside; in m.
double plume_reach(double duty, const PlumeModel& model);

// Cone half-angle in radians:
// theta(duty) = theta_100 * min(1, duty/full_coverage_duty)^exponent.
double cone_half_angle(double duty, const PlumeModel& model);

// Simulated 76x26 mm strip at 1 px/mm. `offset_m` is the paper center along
// the row axis (absolute in scenario coordinates, relative to the nozzle
// axis in stationary exposures); `boom_m` along the boom axis.
struct WaterSensitivePaper {
  int id = 0;  // placement order, preserved across internal sorting
  int zone = 0;
  double distance_m = 0.9;
  double offset_m = 0.0;
  double boom_m = 0.0;
  std::string tag;
  int rows = 76;  // row-axis extent, px (= mm)
  int cols = 26;  // boom-axis extent, px (= mm)
  std::vector<std::uint8_t> stained;

  WaterSensitivePaper() { stained.assign(static_cast<std::size_t>(rows) * cols, 0); }
  WaterSensitivePaper(int zone_, double distance, double offset, double boom,
                      std::string tag_ = {}, int rows_ = 76, int cols_ = 26)
      : zone(zone_), distance_m(distance), offset_m(offset), boom_m(boom),
        tag(std::move(tag_)), rows(rows_), cols(cols_),
        stained(static_cast<std::size_t>(rows_) * cols_, 0) {}

  std::size_t stained_count() const;
  double width_m() const { return rows * 1e-3; }   // along the row axis
  double height_m() const { return cols * 1e-3; }  // along the boom axis
};

// Eq-exact pesticide adhesion rate: 100 * stained / (rows*cols), percent.
double adhesion_rate(const WaterSensitivePaper& paper);

struct DepositionField {
  std::vector<WaterSensitivePaper> papers;
  std::vector<double> zone_emitted_l;  // per-nozzle dispensed volume
  std::uint64_t droplets_emitted = 0;
  std::uint64_t droplets_deposited = 0;
};

// Stamps droplets from a boom of nozzles onto papers. Droplet directions are
// sampled per nozzle from an independent seeded stream (seed mixed with the
// nozzle index), so results do not depend on which other nozzles are active.
// Single-owner mutable state; one instance per trial.
class Depositor {
 public:
  Depositor(const PlumeModel& model, int n_nozzles, double boom_span_m,
            std::uint64_t seed);

  void attach_papers(std::vector<WaterSensitivePaper> papers);

  // One integration step with the platform at row position s_m, commanded
  // duty and simulated flow per nozzle. Cone geometry follows the commanded
  // duty; the droplet budget follows the simulated flow.
  void step(double s_m, std::span<const double> duty,
            std::span<const double> flow_m3s, double dt);

  // Calibration-style exposure: one nozzle held at a steady duty for
  // duration_s with the platform fixed at s = 0.
  void expose_stationary(int nozzle, double duty, double flow_m3s,
                         double duration_s);

  double nozzle_boom_center(int nozzle) const;
  DepositionField take_field();

 private:
  void stamp_droplets(int nozzle, double s_m, double duty, int count);
  bool any_candidate(int nozzle, double s_m) const;

  PlumeModel model_;
  int n_nozzles_;
  double boom_span_m_;
  std::vector<Rng> streams_;      // one droplet stream per nozzle
  std::vector<double> emit_acc_;  // fractional droplet carry per nozzle
  double candidate_radius_ = 0.0; // duty-independent paper prefilter radius
  DepositionField field_;
};

// Spec-surface deposition: a duty schedule against stationary papers.
DepositionField deposit(const std::vector<std::vector<NozzleCommand>>& commands,
                        std::vector<WaterSensitivePaper> papers,
                        const PlumeModel& model, const ValveParams& valve,
                        double dt, double pwm_frequency_hz = 10.0,
                        PwmMode pwm_mode = PwmMode::Averaged);

// One calibration grid cell; x is the fruit-tree area percentage for the
// coverage sweep and the distance in meters for the reach sweep.
struct CoverageCell {
  double duty = 0.0;
  double x = 0.0;
  double mean_rp = 0.0;
  double sd_rp = 0.0;
};

struct CalibrationConfig {
  double exposure_s = 150.0;     // stationary spray time per grid cell
  double zone_span_m = 0.42;     // boom extent mapped to the 100% area case
  double pe1_distance_m = 0.9;   // paper plane for the coverage sweep
  int pe1_papers = 4;            // papers spread across the area extent
  double duty_min = 75.0;
  double duty_max = 100.0;
  double duty_step = 5.0;
};

// Coverage-vs-duty sweep: duty 75..100 step 5, area 30..100% step 10.
std::vector<CoverageCell> replicate_pe1(const PlumeModel& model,
                                        const ValveParams& valve,
                                        const CalibrationConfig& cal);

// Reach-vs-duty sweep: duty 75..100 step 5, distance 0.7..1.6 m step 0.3.
std::vector<CoverageCell> replicate_pe2(const PlumeModel& model,
                                        const ValveParams& valve,
                                        const CalibrationConfig& cal);

// CSV: duty,area_or_distance,mean_rp,sd_rp
void write_coverage_csv(std::ostream& os, const std::vector<CoverageCell>& cells);

void save_paper_raster(const WaterSensitivePaper& paper,
                       const std::filesystem::path& path);

}  // namespace spraysim
