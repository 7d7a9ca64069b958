#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spraysim/errors.hpp"
#include "spraysim/fsio.hpp"
#include "spraysim/harness.hpp"
#include "spraysim/rng.hpp"

#include "json.hpp"

namespace spraysim {

using nlohmann::json;

const char* to_string(ZoneTag tag) { return tag == ZoneTag::Target ? "T" : "NT"; }

ZoneTag zone_tag_from_string(std::string_view s) {
  if (s == "T") return ZoneTag::Target;
  if (s == "NT") return ZoneTag::NoTarget;
  throw ScenarioError("unknown zone tag '" + std::string(s) + "' (valid: T, NT)");
}

int Scenario::frame_count() const {
  if (!frame_files.empty()) return static_cast<int>(frame_files.size());
  const double interval = frame_interval_s();
  return static_cast<int>(std::ceil(duration_s() / interval - 1e-9));
}

double Scenario::frame_interval_s() const {
  if (generator) return generator->frame_interval_s;
  return 0.2;
}

double Scenario::frame_time_s(int frame_index) const {
  if (!frame_files.empty())
    return frame_files.at(static_cast<std::size_t>(frame_index)).t;
  return frame_index * frame_interval_s();
}

const ScenarioZone& Scenario::zone_at(double s_m) const {
  double start = 0.0;
  for (const auto& z : zones) {
    if (s_m < start + z.length_m) return z;
    start += z.length_m;
  }
  return zones.back();
}

double Scenario::zone_start_m(std::size_t zone_index) const {
  double start = 0.0;
  for (std::size_t i = 0; i < zone_index && i < zones.size(); ++i)
    start += zones[i].length_m;
  return start;
}

namespace {

// hash streams for the procedural scene
enum : std::int64_t {
  kFaceStream = 11,
  kDensityStream = 12,
  kOccupancyStream = 13,
  kDepthStream = 14,
  kFruitStream = 15,
  kBackgroundStream = 16,
  kBackgroundDepthStream = 17,
  kGroundDepthStream = 18,
};

// Trees are treated as 1 m sections along the row; face distance and canopy
// density are constant within a section.
constexpr double kTreeSectionM = 1.0;

double section_noise(std::uint64_t seed, double s_m, std::int64_t stream) {
  const auto section = static_cast<std::int64_t>(std::floor(s_m / kTreeSectionM));
  return hash01(seed, section, stream);
}

double canopy_density(const GeneratorSpec& spec, std::uint64_t seed, double s_m,
                      int strip) {
  const auto section = static_cast<std::int64_t>(std::floor(s_m / kTreeSectionM));
  const double u = hash01(seed, section, kDensityStream, strip);
  return spec.canopy_density_min +
         u * (spec.canopy_density_max - spec.canopy_density_min);
}

}  // namespace

double canopy_face_m(const GeneratorSpec& spec, std::uint64_t seed, double s_m) {
  return spec.canopy_face_min_m +
         section_noise(seed, s_m, kFaceStream) *
             (spec.canopy_face_max_m - spec.canopy_face_min_m);
}

void synthesize_frame(const Scenario& scenario, int frame_index,
                      SegmentedFrame& seg, DepthFrame& depth) {
  if (!scenario.generator)
    throw ScenarioError("scenario '" + scenario.name + "' has no frame generator");
  const GeneratorSpec& spec = *scenario.generator;
  const std::uint64_t seed = scenario.seed;

  const int w = spec.frame_width;
  const int h = spec.frame_height;
  seg = SegmentedFrame(w, h, SegClass::Sky);
  depth = DepthFrame(w, h, 0.0f);
  seg.frame_id = static_cast<std::uint64_t>(frame_index);
  seg.timestamp = frame_index * spec.frame_interval_s;

  const double s_p = scenario.v_p * seg.timestamp;
  const double row_scale = spec.fov_m / h;        // meters per row pixel
  const double boom_scale = scenario.boom_span_m / w;  // meters per column pixel
  const int strip_w = w / 4 > 0 ? w / 4 : w;
  const double ground_band_m = 0.16;

  for (int y = 0; y < h; ++y) {
    const double s = s_p - spec.fov_m / 2.0 + (y + 0.5) * row_scale;
    const bool in_row = s >= 0.0 && s < scenario.row_length_m;
    const bool target = in_row && scenario.zone_at(s).tag == ZoneTag::Target;
    const auto cell_s = static_cast<std::int64_t>(std::floor(s / spec.cell_m));
    const std::size_t row_base = static_cast<std::size_t>(y) * w;

    for (int x = 0; x < w; ++x) {
      const double b = (x + 0.5) * boom_scale;
      const std::size_t i = row_base + x;

      if (b < ground_band_m) {
        seg.classes[i] = static_cast<std::uint8_t>(SegClass::Ground);
        depth.depth_m[i] = static_cast<float>(
            0.8 + hash01(seed, cell_s, kGroundDepthStream) * 1.0);
        continue;
      }

      const auto cell_b = static_cast<std::int64_t>(std::floor(b / spec.cell_m));
      if (target) {
        const int strip = std::min(x / strip_w, 3);
        const double density = canopy_density(spec, seed, s, strip);
        if (hash01(seed, cell_s, cell_b, kOccupancyStream) < density) {
          const bool fruit =
              hash01(seed, cell_s, cell_b, kFruitStream) < spec.fruit_fraction;
          seg.classes[i] = static_cast<std::uint8_t>(fruit ? SegClass::Fruit
                                                           : SegClass::Tree);
          const double face = canopy_face_m(spec, seed, s);
          depth.depth_m[i] = static_cast<float>(
              face + hash01(seed, cell_s, cell_b, kDepthStream) * spec.canopy_depth_m);
          continue;
        }
      }

      // Background row of trees, visible through gaps and in no-target
      // segments; beyond the depth gate by construction.
      if (hash01(seed, cell_s, cell_b, kBackgroundStream) <
          spec.background_tree_density) {
        seg.classes[i] = static_cast<std::uint8_t>(SegClass::Tree);
        depth.depth_m[i] = static_cast<float>(
            spec.background_tree_min_m +
            hash01(seed, cell_s, cell_b, kBackgroundDepthStream) *
                (spec.background_tree_max_m - spec.background_tree_min_m));
        continue;
      }

      // Trellis post roughly every 6 m.
      const double post_local = s - std::floor(s / 6.0) * 6.0;
      if (in_row && post_local < 0.03) {
        seg.classes[i] = static_cast<std::uint8_t>(SegClass::Pipe);
        depth.depth_m[i] = 1.1f;
        continue;
      }
      // Sky keeps the invalid-depth sentinel.
    }
  }
}

Scenario generate_scenario(const GeneratorSpec& spec,
                           const std::vector<ScenarioZone>& zones, double v_p,
                           std::uint64_t seed, const std::string& name,
                           double gate_threshold) {
  if (zones.empty()) throw ScenarioError("scenario needs at least one zone");
  if (!(v_p > 0.0)) throw ScenarioError("v_p must be > 0");
  if (spec.canopy_density_min <= gate_threshold)
    throw ScenarioError(
        "unsatisfiable generator spec: canopy density band starts at or below "
        "the spray gate threshold");
  if (!(spec.canopy_face_max_m >= spec.canopy_face_min_m &&
        spec.canopy_face_min_m > 0.0))
    throw ScenarioError("bad canopy face band");

  Scenario scenario;
  scenario.name = name;
  scenario.v_p = v_p;
  scenario.seed = seed;
  scenario.zones = zones;
  scenario.generator = spec;
  scenario.row_length_m = 0.0;
  for (const auto& z : zones) {
    if (!(z.length_m > 0.0)) throw ScenarioError("zone lengths must be > 0");
    scenario.row_length_m += z.length_m;
  }

  // Papers per tag group, spread evenly across that tag's zones and across
  // the two central nozzle strips. Target papers sit just on the local
  // canopy face; no-target papers hang at the canopy line.
  for (ZoneTag tag : {ZoneTag::Target, ZoneTag::NoTarget}) {
    std::vector<std::size_t> tagged;
    for (std::size_t zi = 0; zi < zones.size(); ++zi)
      if (zones[zi].tag == tag) tagged.push_back(zi);
    if (tagged.empty()) continue;

    for (int k = 0; k < spec.papers_per_tag; ++k) {
      const std::size_t zi = tagged[static_cast<std::size_t>(k) % tagged.size()];
      const int slot = k / static_cast<int>(tagged.size());
      const int per_zone =
          (spec.papers_per_tag + static_cast<int>(tagged.size()) - 1) /
          static_cast<int>(tagged.size());
      const double frac = (slot + 1.0) / (per_zone + 1.0);
      PaperPlacement p;
      p.tag = tag;
      p.nozzle_zone = 1 + (k % 2);
      p.row_pos_m = scenario.zone_start_m(zi) + frac * zones[zi].length_m;
      p.distance_m = tag == ZoneTag::Target
                         ? canopy_face_m(spec, seed, p.row_pos_m) + 0.01
                         : spec.nt_paper_distance_m;
      scenario.papers.push_back(p);
    }
  }
  return scenario;
}

Scenario builtin_naju_default(std::uint64_t seed) {
  GeneratorSpec spec;
  std::vector<ScenarioZone> zones;
  const double t_len = 4.25;
  const double nt_len = 8.5 / 3.0;
  for (int i = 1; i <= 3; ++i) {
    zones.push_back({"zone" + std::to_string(i) + "_T", ZoneTag::Target, t_len});
    zones.push_back({"zone" + std::to_string(i) + "_NT", ZoneTag::NoTarget, nt_len});
  }
  return generate_scenario(spec, zones, 0.5, seed, "naju_default");
}

namespace {

json generator_to_json(const GeneratorSpec& g) {
  return json{{"frame_width", g.frame_width},
              {"frame_height", g.frame_height},
              {"fov_m", g.fov_m},
              {"frame_interval_s", g.frame_interval_s},
              {"canopy_density_min", g.canopy_density_min},
              {"canopy_density_max", g.canopy_density_max},
              {"canopy_face_min_m", g.canopy_face_min_m},
              {"canopy_face_max_m", g.canopy_face_max_m},
              {"canopy_depth_m", g.canopy_depth_m},
              {"fruit_fraction", g.fruit_fraction},
              {"cell_m", g.cell_m},
              {"background_tree_density", g.background_tree_density},
              {"background_tree_min_m", g.background_tree_min_m},
              {"background_tree_max_m", g.background_tree_max_m},
              {"nt_paper_distance_m", g.nt_paper_distance_m},
              {"papers_per_tag", g.papers_per_tag}};
}

GeneratorSpec generator_from_json(const json& j) {
  GeneratorSpec g;
  g.frame_width = j.at("frame_width").get<int>();
  g.frame_height = j.at("frame_height").get<int>();
  g.fov_m = j.at("fov_m").get<double>();
  g.frame_interval_s = j.at("frame_interval_s").get<double>();
  g.canopy_density_min = j.at("canopy_density_min").get<double>();
  g.canopy_density_max = j.at("canopy_density_max").get<double>();
  g.canopy_face_min_m = j.at("canopy_face_min_m").get<double>();
  g.canopy_face_max_m = j.at("canopy_face_max_m").get<double>();
  g.canopy_depth_m = j.at("canopy_depth_m").get<double>();
  g.fruit_fraction = j.at("fruit_fraction").get<double>();
  g.cell_m = j.at("cell_m").get<double>();
  g.background_tree_density = j.at("background_tree_density").get<double>();
  g.background_tree_min_m = j.at("background_tree_min_m").get<double>();
  g.background_tree_max_m = j.at("background_tree_max_m").get<double>();
  g.nt_paper_distance_m = j.at("nt_paper_distance_m").get<double>();
  g.papers_per_tag = j.at("papers_per_tag").get<int>();
  return g;
}

}  // namespace

std::string dump_scenario(const Scenario& scenario) {
  json j;
  j["scenario_version"] = scenario.scenario_version;
  j["name"] = scenario.name;
  j["row_length_m"] = scenario.row_length_m;
  j["v_p_mps"] = scenario.v_p;
  j["boom_span_m"] = scenario.boom_span_m;
  j["seed"] = scenario.seed;
  j["zones"] = json::array();
  for (const auto& z : scenario.zones)
    j["zones"].push_back(
        {{"name", z.name}, {"tag", to_string(z.tag)}, {"length_m", z.length_m}});
  j["papers"] = json::array();
  for (const auto& p : scenario.papers)
    j["papers"].push_back({{"tag", to_string(p.tag)},
                           {"nozzle_zone", p.nozzle_zone},
                           {"distance_m", p.distance_m},
                           {"row_pos_m", p.row_pos_m}});
  if (scenario.generator) j["generator"] = generator_to_json(*scenario.generator);
  if (!scenario.frame_files.empty()) {
    j["frames"] = json::array();
    for (const auto& f : scenario.frame_files)
      j["frames"].push_back(
          {{"mask", f.mask_path}, {"depth", f.depth_path}, {"t", f.t}});
  }
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  atomic_write_file(path, dump_scenario(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ScenarioError("scenario file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario manifest parse error in " + path.string() + ": " +
                        e.what());
  }
  try {
    Scenario s;
    s.scenario_version = j.at("scenario_version").get<int>();
    if (s.scenario_version != 1)
      throw ScenarioError("unsupported scenario_version " +
                          std::to_string(s.scenario_version));
    s.name = j.at("name").get<std::string>();
    s.row_length_m = j.at("row_length_m").get<double>();
    s.v_p = j.at("v_p_mps").get<double>();
    s.boom_span_m = j.value("boom_span_m", 1.28);
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& zj : j.at("zones")) {
      ScenarioZone z;
      z.name = zj.at("name").get<std::string>();
      z.tag = zone_tag_from_string(zj.at("tag").get<std::string>());
      z.length_m = zj.at("length_m").get<double>();
      s.zones.push_back(z);
    }
    for (const auto& pj : j.at("papers")) {
      PaperPlacement p;
      p.tag = zone_tag_from_string(pj.at("tag").get<std::string>());
      p.nozzle_zone = pj.at("nozzle_zone").get<int>();
      p.distance_m = pj.at("distance_m").get<double>();
      p.row_pos_m = pj.at("row_pos_m").get<double>();
      s.papers.push_back(p);
    }
    if (j.contains("generator")) s.generator = generator_from_json(j.at("generator"));
    if (j.contains("frames")) {
      for (const auto& fj : j.at("frames")) {
        FrameRef f;
        f.mask_path = fj.at("mask").get<std::string>();
        f.depth_path = fj.at("depth").get<std::string>();
        f.t = fj.at("t").get<double>();
        s.frame_files.push_back(f);
      }
    }
    s.base_dir = path.parent_path();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError("scenario manifest error in " + path.string() + ": " +
                        e.what());
  }
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "naju_default" && !std::filesystem::exists(name_or_path))
    return builtin_naju_default();
  return load_scenario(name_or_path);
}

std::filesystem::path materialize_scenario(const Scenario& scenario,
                                           const std::filesystem::path& dir) {
  if (!scenario.generator)
    throw ScenarioError("only generator-backed scenarios can be materialized");
  std::filesystem::create_directories(dir);

  Scenario out = scenario;
  out.generator.reset();
  out.frame_files.clear();

  const int n = scenario.frame_count();
  SegmentedFrame seg;
  DepthFrame depth;
  for (int i = 0; i < n; ++i) {
    synthesize_frame(scenario, i, seg, depth);
    char mask_name[48], depth_name[48];
    std::snprintf(mask_name, sizeof(mask_name), "frame_%05d.sm1", i);
    std::snprintf(depth_name, sizeof(depth_name), "frame_%05d.d16", i);
    save_mask(seg, dir / mask_name);
    save_depth(depth, dir / depth_name);
    out.frame_files.push_back({mask_name, depth_name, seg.timestamp});
  }
  const auto manifest = dir / "scenario.json";
  save_scenario(out, manifest);
  return manifest;
}

namespace {

void load_frame(const Scenario& scenario, int index, SegmentedFrame& seg,
                DepthFrame& depth) {
  if (scenario.generator) {
    synthesize_frame(scenario, index, seg, depth);
    return;
  }
  const auto& ref = scenario.frame_files.at(static_cast<std::size_t>(index));
  seg = load_mask(scenario.base_dir / ref.mask_path);
  depth = load_depth(scenario.base_dir / ref.depth_path);
  seg.frame_id = static_cast<std::uint64_t>(index);
  seg.timestamp = ref.t;
  if (seg.width != depth.width || seg.height != depth.height)
    throw ScenarioError("frame " + std::to_string(index) +
                        ": mask/depth dimensions disagree");
}

}  // namespace

void validate_scenario(const Scenario& scenario, const AppConfig& config) {
  if (scenario.scenario_version != 1)
    throw ScenarioError("unsupported scenario_version");
  if (scenario.zones.empty()) throw ScenarioError("scenario has no zones");
  if (!(scenario.row_length_m > 0.0)) throw ScenarioError("row_length_m must be > 0");
  if (!(scenario.v_p > 0.0)) throw ScenarioError("v_p must be > 0");
  if (!(scenario.boom_span_m > 0.0)) throw ScenarioError("boom_span_m must be > 0");
  double sum = 0.0;
  for (const auto& z : scenario.zones) {
    if (!(z.length_m > 0.0)) throw ScenarioError("zone lengths must be > 0");
    sum += z.length_m;
  }
  if (std::abs(sum - scenario.row_length_m) > 1e-6)
    throw ScenarioError("zone lengths do not sum to row_length_m");
  if (!scenario.generator && scenario.frame_files.empty())
    throw ScenarioError("scenario needs either a generator or frame files");
  for (const auto& p : scenario.papers) {
    if (p.nozzle_zone < 0 || p.nozzle_zone >= config.sim.n_zones)
      throw ScenarioError("paper nozzle_zone out of range");
    if (!(p.row_pos_m >= 0.0 && p.row_pos_m <= scenario.row_length_m))
      throw ScenarioError("paper row position outside the row");
    if (!(p.distance_m > 0.0)) throw ScenarioError("paper distance must be > 0");
  }

  // Threshold invariants, checked on frames whose field of view lies fully
  // inside one zone; boundary frames necessarily mix adjacent zone content.
  const double fov = scenario.generator ? scenario.generator->fov_m : 2.0;
  const int n_frames = scenario.frame_count();
  const double thres = config.controller.thres_nozzle;

  SegmentedFrame seg;
  DepthFrame depth;
  double zone_start = 0.0;
  for (const auto& zone : scenario.zones) {
    const double lo = zone_start + fov / 2.0;
    const double hi = zone_start + zone.length_m - fov / 2.0;
    zone_start += zone.length_m;
    if (lo >= hi) continue;  // zone shorter than the field of view

    std::vector<int> interior;
    for (int i = 0; i < n_frames; ++i) {
      const double s_p = scenario.v_p * scenario.frame_time_s(i);
      if (s_p >= lo && s_p <= hi) interior.push_back(i);
    }
    if (interior.empty()) continue;

    // Target zones must trip the gate somewhere; sampling three interior
    // frames keeps validation cheap on long rows. No-target zones must stay
    // below the gate on every interior frame.
    if (zone.tag == ZoneTag::Target) {
      bool seen = false;
      const std::size_t step = std::max<std::size_t>(1, interior.size() / 3);
      for (std::size_t k = 0; k < interior.size() && !seen; k += step) {
        load_frame(scenario, interior[k], seg, depth);
        for (const auto& f :
             frame_features(seg, depth, scenario.v_p, config.sim.n_zones,
                            config.sim.axis, config.sim.distance_stat,
                            config.sim.max_depth_m))
          if (f.a_p > thres) seen = true;
      }
      if (!seen)
        throw ScenarioError("target zone '" + zone.name +
                            "' never exceeds the spray gate threshold");
    } else {
      for (int idx : interior) {
        load_frame(scenario, idx, seg, depth);
        for (const auto& f :
             frame_features(seg, depth, scenario.v_p, config.sim.n_zones,
                            config.sim.axis, config.sim.distance_stat,
                            config.sim.max_depth_m))
          if (f.a_p > thres)
            throw ScenarioError("no-target zone '" + zone.name +
                                "' exceeds the spray gate threshold at frame " +
                                std::to_string(idx));
      }
    }
  }
}

}  // namespace spraysim
