#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spraysim/config.hpp"
#include "spraysim/spray.hpp"

namespace spraysim {

enum class ZoneTag { Target, NoTarget };

const char* to_string(ZoneTag tag);  // "T" | "NT"
ZoneTag zone_tag_from_string(std::string_view s);

// A contiguous row segment with or without fruit trees.
struct ScenarioZone {
  std::string name;
  ZoneTag tag = ZoneTag::NoTarget;
  double length_m = 0.0;
};

struct PaperPlacement {
  ZoneTag tag = ZoneTag::Target;
  int nozzle_zone = 0;
  double distance_m = 0.9;  // spray-axis distance from the boom
  double row_pos_m = 0.0;   // absolute position along the row
};

// Procedural orchard-row synthesis. Frames are a pure function of
// (scenario seed, frame index), so trials never need raster files on disk.
struct GeneratorSpec {
  int frame_width = 1280;
  int frame_height = 256;
  double fov_m = 2.0;  // row extent imaged by one frame
  double frame_interval_s = 0.2;
  double canopy_density_min = 0.3;
  double canopy_density_max = 1.0;
  double canopy_face_min_m = 0.72;  // nearest canopy surface band
  double canopy_face_max_m = 0.86;
  double canopy_depth_m = 0.8;
  double fruit_fraction = 0.08;
  double cell_m = 0.08;  // canopy occupancy noise cell size
  double background_tree_density = 0.35;
  double background_tree_min_m = 2.4;  // beyond the depth gate by design
  double background_tree_max_m = 3.6;
  double nt_paper_distance_m = 1.05;
  int papers_per_tag = 9;
};

struct FrameRef {
  std::string mask_path;
  std::string depth_path;
  double t = 0.0;
};

struct Scenario {
  int scenario_version = 1;
  std::string name;
  double row_length_m = 0.0;
  double v_p = 0.5;          // m/s
  double boom_span_m = 1.28; // boom extent imaged by the frame width
  std::uint64_t seed = 1;
  std::vector<ScenarioZone> zones;
  std::vector<PaperPlacement> papers;
  std::optional<GeneratorSpec> generator;  // either this or frame_files
  std::vector<FrameRef> frame_files;
  std::filesystem::path base_dir;  // resolves relative frame paths

  double duration_s() const { return v_p > 0 ? row_length_m / v_p : 0.0; }
  int frame_count() const;
  double frame_interval_s() const;
  double frame_time_s(int frame_index) const;
  // Zone lookup by row position; positions beyond the row clamp to the ends.
  const ScenarioZone& zone_at(double s_m) const;
  double zone_start_m(std::size_t zone_index) const;
};

// Builds a scenario (zones, papers, embedded generator) from a layout.
// Target papers sit on the local canopy face; no-target papers hang at the
// canopy line, which no reduced-duty plume reaches.
Scenario generate_scenario(const GeneratorSpec& spec,
                           const std::vector<ScenarioZone>& zones, double v_p,
                           std::uint64_t seed, const std::string& name,
                           double gate_threshold = 0.10);

// Canopy face distance used by both frame synthesis and paper placement.
double canopy_face_m(const GeneratorSpec& spec, std::uint64_t seed, double s_m);

// The shipped field layout: three zones, each split into a target and a
// no-target segment, nine papers per tag group.
Scenario builtin_naju_default(std::uint64_t seed = 1);

Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);  // manifest JSON
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Resolves --scenario: builtin name first, then manifest path.
Scenario resolve_scenario(const std::string& name_or_path);

// Deterministic frame synthesis for generator-backed scenarios.
void synthesize_frame(const Scenario& scenario, int frame_index,
                      SegmentedFrame& seg, DepthFrame& depth);

// Writes every frame of a generator-backed scenario as raster files plus a
// manifest referencing them; returns the manifest path.
std::filesystem::path materialize_scenario(const Scenario& scenario,
                                           const std::filesystem::path& dir);

// Checks zone/threshold invariants on frames whose field of view lies fully
// inside one zone (boundary frames necessarily mix zone content).
// Throws ScenarioError.
void validate_scenario(const Scenario& scenario, const AppConfig& config);

struct PaperResult {
  int paper_index = 0;
  ZoneTag tag = ZoneTag::Target;
  double rp = 0.0;
};

struct TrialResult {
  ControlMode mode = ControlMode::AllOpen;
  std::uint64_t seed = 0;
  std::vector<PaperResult> papers;
  double volume_l = 0.0;
  std::vector<FlowSample> trace;
  DepositionField field;
};

TrialResult run_trial(const Scenario& scenario, ControlMode mode,
                      const AppConfig& config, std::uint64_t seed,
                      bool keep_trace = false);

struct TagStats {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n-1); 0 with n == 1
  double max = 0.0;
  double min = 0.0;
  int n = 0;
};

TagStats summarize_values(const std::vector<double>& values);

struct ModeReport {
  ControlMode mode = ControlMode::AllOpen;
  TagStats target;
  TagStats no_target;
  double volume_l = 0.0;
  double reduction_pct = 0.0;  // vs AllOpen; 0 for AllOpen itself
};

struct Report {
  std::vector<ModeReport> modes;
  // Raw values per (mode, tag) in trial order, kept so every statistic can
  // be recomputed from first principles.
  std::vector<std::vector<double>> raw_target;
  std::vector<std::vector<double>> raw_no_target;

  const ModeReport& mode(ControlMode m) const;
  bool self_consistent(double tol = 1e-12) const;
};

// Aggregates trials (papers pooled across seeds per mode); volumes averaged.
Report summarize(const std::vector<TrialResult>& trials);

// Runs all three modes for every seed over identical frames, in parallel up
// to `jobs` trials, and aggregates a field report. When trials_out is given
// it receives the individual trial results in (seed, mode) order.
Report compare_controls(const Scenario& scenario,
                        const std::vector<std::uint64_t>& seeds,
                        const AppConfig& config, int jobs = 0,
                        std::vector<TrialResult>* trials_out = nullptr);

// CSV: mode,tag,mean,sd,max,min,volume_l,reduction_pct
void write_report_csv(std::ostream& os, const Report& report);
// CSV: mode,seed,paper_index,tag,rp
void write_trials_csv(std::ostream& os, const std::vector<TrialResult>& trials);

}  // namespace spraysim
