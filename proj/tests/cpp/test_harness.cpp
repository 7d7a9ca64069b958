#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"

#include "spraysim/errors.hpp"
#include "spraysim/harness.hpp"

using namespace spraysim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* leaf) {
  const auto dir = fs::temp_directory_path() / "spraysim_harness_tests" / leaf;
  fs::create_directories(dir);
  return dir;
}

// Cut the Monte Carlo budget so behavioral trials stay fast; volumes and
// command traces are unaffected by the droplet rate.
AppConfig fast_config() {
  AppConfig config;
  config.plume.droplet_rate_per_l = 1e5;
  return config;
}

Scenario small_scenario(std::uint64_t seed = 1) {
  GeneratorSpec spec;
  std::vector<ScenarioZone> zones = {{"t1", ZoneTag::Target, 4.25},
                                     {"nt1", ZoneTag::NoTarget, 8.5 / 3.0},
                                     {"t2", ZoneTag::Target, 4.25}};
  return generate_scenario(spec, zones, 0.5, seed, "small");
}

}  // namespace

TEST_CASE("summarize_values basic statistics") {
  SUBCASE("single value reports sd 0 with n = 1") {
    const TagStats s = summarize_values({40.0});
    CHECK(s.mean == 40.0);
    CHECK(s.sd == 0.0);
    CHECK(s.max == 40.0);
    CHECK(s.min == 40.0);
    CHECK(s.n == 1);
  }
  SUBCASE("two-value sample sd against the hand formula") {
    const TagStats s = summarize_values({14.85, 72.37});
    const double mean = (14.85 + 72.37) / 2.0;
    const double sd = std::sqrt(((14.85 - mean) * (14.85 - mean) +
                                 (72.37 - mean) * (72.37 - mean)) /
                                1.0);
    CHECK(s.mean == doctest::Approx(43.61).epsilon(1e-12));
    CHECK(s.sd == doctest::Approx(sd).epsilon(1e-12));
    CHECK(s.max == 72.37);
    CHECK(s.min == 14.85);
  }
  SUBCASE("empty input gives the n = 0 sentinel") {
    const TagStats s = summarize_values({});
    CHECK(s.n == 0);
    CHECK(s.mean == 0.0);
  }
}

TEST_CASE("pooling balanced trials averages their means") {
  // Two equal-sized trials with means 53.27 and 59.03 pool to 56.15.
  auto trial = [](double mean, ControlMode mode) {
    TrialResult t;
    t.mode = mode;
    t.volume_l = 10.0;
    for (int i = 0; i < 3; ++i)
      t.papers.push_back({i, ZoneTag::Target, mean});
    return t;
  };
  const Report report = summarize(
      {trial(53.27, ControlMode::AllOpen), trial(59.03, ControlMode::AllOpen)});
  CHECK(report.mode(ControlMode::AllOpen).target.mean ==
        doctest::Approx(56.15).epsilon(1e-12));
  CHECK(report.mode(ControlMode::AllOpen).target.n == 6);
  CHECK(report.self_consistent());
}

TEST_CASE("summarize rejects empty input and computes reductions") {
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);

  TrialResult all, var;
  all.mode = ControlMode::AllOpen;
  all.volume_l = 20.0;
  all.papers.push_back({0, ZoneTag::Target, 50.0});
  var.mode = ControlMode::VariableFlow;
  var.volume_l = 11.0;
  var.papers.push_back({0, ZoneTag::Target, 48.0});

  const Report report = summarize({all, var});
  CHECK(report.mode(ControlMode::AllOpen).reduction_pct == 0.0);
  CHECK(report.mode(ControlMode::VariableFlow).reduction_pct ==
        doctest::Approx(45.0).epsilon(1e-12));
}

TEST_CASE("generated scenarios are deterministic and validated") {
  SUBCASE("manifest bytes are identical across regenerations") {
    const Scenario a = builtin_naju_default(7);
    const Scenario b = builtin_naju_default(7);
    CHECK(dump_scenario(a) == dump_scenario(b));
  }
  SUBCASE("naju default layout") {
    const Scenario s = builtin_naju_default();
    CHECK(s.zones.size() == 6);
    CHECK(s.papers.size() == 18);
    CHECK(s.row_length_m == doctest::Approx(21.25));
    int t = 0, nt = 0;
    for (const auto& p : s.papers) (p.tag == ZoneTag::Target ? t : nt)++;
    CHECK(t == 9);
    CHECK(nt == 9);
    CHECK_NOTHROW(validate_scenario(s, AppConfig{}));
  }
  SUBCASE("canopy band at or below the gate threshold is unsatisfiable") {
    GeneratorSpec spec;
    spec.canopy_density_min = 0.08;
    CHECK_THROWS_AS(
        generate_scenario(spec, {{"t", ZoneTag::Target, 5.0}}, 0.5, 1, "bad"),
        ScenarioError);
  }
  SUBCASE("target papers sit inside every reduced plume's reach") {
    const Scenario s = builtin_naju_default();
    for (const auto& p : s.papers)
      if (p.tag == ZoneTag::Target) CHECK(p.distance_m < 0.9);
  }
}

TEST_CASE("scenario manifests round-trip through disk") {
  const Scenario original = small_scenario(3);
  const auto path = temp_dir("roundtrip") / "scenario.json";
  save_scenario(original, path);
  const Scenario loaded = load_scenario(path);
  CHECK(dump_scenario(loaded) == dump_scenario(original));
  CHECK_NOTHROW(validate_scenario(loaded, AppConfig{}));
}

TEST_CASE("scenario loading errors") {
  CHECK_THROWS_AS(load_scenario("definitely_missing.json"), ScenarioError);
  CHECK_THROWS_AS(resolve_scenario("also_missing.json"), ScenarioError);

  const auto dir = temp_dir("badload");
  SUBCASE("unsupported version") {
    Scenario s = small_scenario();
    s.scenario_version = 2;
    save_scenario(s, dir / "v2.json");
    CHECK_THROWS_AS(load_scenario(dir / "v2.json"), ScenarioError);
  }
  SUBCASE("zone lengths must add up") {
    Scenario s = small_scenario();
    s.row_length_m += 1.0;
    save_scenario(s, dir / "sum.json");
    const Scenario loaded = load_scenario(dir / "sum.json");
    CHECK_THROWS_AS(validate_scenario(loaded, AppConfig{}), ScenarioError);
  }
}

TEST_CASE("frame synthesis is deterministic and depth-gates the background") {
  const Scenario s = builtin_naju_default();
  SegmentedFrame a, b;
  DepthFrame da, db;
  synthesize_frame(s, 10, a, da);
  synthesize_frame(s, 10, b, db);
  CHECK(a.classes == b.classes);
  CHECK(da.depth_m == db.depth_m);
  CHECK(a.frame_id == 10);

  // Pick a frame fully inside a no-target zone: background trees are present
  // in the raw mask but all beyond 2 m, so gating empties every zone.
  const double nt_center = 4.25 + (8.5 / 3.0) / 2.0;
  const int idx = static_cast<int>(nt_center / s.v_p / s.frame_interval_s());
  SegmentedFrame seg;
  DepthFrame depth;
  synthesize_frame(s, idx, seg, depth);

  std::size_t raw_trees = 0, far_trees = 0;
  for (std::size_t i = 0; i < seg.classes.size(); ++i)
    if (is_spray_class(static_cast<SegClass>(seg.classes[i]))) {
      ++raw_trees;
      if (depth.depth_m[i] > 2.0f) ++far_trees;
    }
  CHECK(raw_trees > 0);
  CHECK(far_trees == raw_trees);  // everything visible there is backdrop

  for (const auto& f : frame_features(seg, depth, s.v_p))
    CHECK(f.a_p == 0.0);
}

TEST_CASE("scenario validation catches mislabeled zones") {
  // Materialize a small scenario, then relabel a target zone as no-target;
  // its interior frames now violate the threshold invariant.
  const Scenario s = small_scenario(5);
  const auto dir = temp_dir("materialized");
  const auto manifest = materialize_scenario(s, dir);
  Scenario loaded = load_scenario(manifest);
  CHECK_NOTHROW(validate_scenario(loaded, AppConfig{}));
  CHECK(loaded.frame_files.size() ==
        static_cast<std::size_t>(small_scenario(5).frame_count()));

  loaded.zones[0].tag = ZoneTag::NoTarget;
  loaded.zones[0].name = "relabeled";
  CHECK_THROWS_WITH_AS(validate_scenario(loaded, AppConfig{}),
                       doctest::Contains("relabeled"), ScenarioError);

  // And the reverse: a no-target zone claimed as target never trips the gate.
  Scenario reversed = load_scenario(manifest);
  reversed.zones[1].tag = ZoneTag::Target;
  reversed.zones[1].name = "claimed";
  CHECK_THROWS_WITH_AS(validate_scenario(reversed, AppConfig{}),
                       doctest::Contains("claimed"), ScenarioError);
}

TEST_CASE("file-backed scenarios replay like generator-backed ones") {
  // Materialized frames quantize depth to millimeters, so duties shift by a
  // hair; volumes must agree to well under a percent and the pipeline must
  // accept raster files end to end.
  const AppConfig config = fast_config();
  const Scenario gen = small_scenario(13);
  const auto manifest = materialize_scenario(gen, temp_dir("replay"));
  const Scenario filed = load_scenario(manifest);

  const TrialResult from_gen = run_trial(gen, ControlMode::VariableFlow, config, 2);
  const TrialResult from_files =
      run_trial(filed, ControlMode::VariableFlow, config, 2);
  CHECK(from_files.volume_l ==
        doctest::Approx(from_gen.volume_l).epsilon(5e-3));
  CHECK(from_files.papers.size() == from_gen.papers.size());

  // Same trial twice from files is exactly reproducible.
  const TrialResult again = run_trial(filed, ControlMode::VariableFlow, config, 2);
  CHECK(again.volume_l == from_files.volume_l);
  for (std::size_t i = 0; i < again.papers.size(); ++i)
    CHECK(again.papers[i].rp == from_files.papers[i].rp);
}

TEST_CASE("all-open trials hold every nozzle at full duty") {
  const AppConfig config = fast_config();
  const Scenario s = small_scenario(11);
  const TrialResult trial = run_trial(s, ControlMode::AllOpen, config, 1, true);
  REQUIRE(!trial.trace.empty());
  for (const auto& sample : trial.trace) CHECK(sample.duty == 100.0);
  CHECK(trial.volume_l > 0.0);
}

TEST_CASE("a scenario with no target zones dispenses nothing under control") {
  GeneratorSpec spec;
  const Scenario s = generate_scenario(
      spec, {{"nt_only", ZoneTag::NoTarget, 6.0}}, 0.5, 2, "nt_only");
  const AppConfig config = fast_config();

  const TrialResult onoff = run_trial(s, ControlMode::OnOff, config, 1);
  CHECK(onoff.volume_l == 0.0);
  for (const auto& p : onoff.papers) CHECK(p.rp == 0.0);

  const TrialResult var = run_trial(s, ControlMode::VariableFlow, config, 1);
  CHECK(var.volume_l == 0.0);

  const TrialResult all = run_trial(s, ControlMode::AllOpen, config, 1);
  CHECK(all.volume_l > 0.0);
}

TEST_CASE("volume ordering and NT suppression on the field layout") {
  const AppConfig config = fast_config();
  const Scenario s = builtin_naju_default(21);

  const TrialResult all = run_trial(s, ControlMode::AllOpen, config, 5);
  const TrialResult onoff = run_trial(s, ControlMode::OnOff, config, 5);
  const TrialResult var = run_trial(s, ControlMode::VariableFlow, config, 5);

  CHECK(var.volume_l < onoff.volume_l);
  CHECK(onoff.volume_l < all.volume_l);

  // Deep-interior no-target papers stay inside the bleed tolerance under
  // both controlled modes; the all-open baseline coats them.
  for (const auto& trial : {onoff, var}) {
    for (const auto& p : trial.papers) {
      if (p.tag != ZoneTag::NoTarget) continue;
      const auto& placement = s.papers[static_cast<std::size_t>(p.paper_index)];
      double zone_start = 0.0;
      for (const auto& z : s.zones) {
        if (placement.row_pos_m < zone_start + z.length_m) {
          const double from_edge =
              std::min(placement.row_pos_m - zone_start,
                       zone_start + z.length_m - placement.row_pos_m);
          if (from_edge > 1.3) CHECK(p.rp <= config.sim.nt_bleed_tolerance_pct);
          break;
        }
        zone_start += z.length_m;
      }
    }
  }
}

TEST_CASE("compare_controls is reproducible byte for byte") {
  AppConfig config = fast_config();
  const Scenario s = small_scenario(8);
  const std::vector<std::uint64_t> seeds = {3, 4};

  std::vector<TrialResult> trials_a, trials_b;
  const Report a = compare_controls(s, seeds, config, 2, &trials_a);
  const Report b = compare_controls(s, seeds, config, 1, &trials_b);

  std::ostringstream csv_a, csv_b, raw_a, raw_b;
  write_report_csv(csv_a, a);
  write_report_csv(csv_b, b);
  CHECK(csv_a.str() == csv_b.str());
  write_trials_csv(raw_a, trials_a);
  write_trials_csv(raw_b, trials_b);
  CHECK(raw_a.str() == raw_b.str());

  CHECK(a.self_consistent());
  CHECK(a.modes.size() == 3);
  CHECK(csv_a.str().rfind("mode,tag,mean,sd,max,min,volume_l,reduction_pct\n", 0) == 0);
}
