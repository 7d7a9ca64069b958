#include <filesystem>

#include "doctest.h"

#include "spraysim/config.hpp"
#include "spraysim/errors.hpp"
#include "spraysim/fsio.hpp"

using namespace spraysim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "spraysim_config_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults validate and dump round-trips byte for byte") {
  const AppConfig defaults = default_config();
  CHECK_NOTHROW(defaults.validate());

  const std::string dumped = dump_config(defaults);
  AppConfig reloaded = default_config();
  apply_config_text(reloaded, dumped, "dump");
  CHECK(dump_config(reloaded) == dumped);
}

TEST_CASE("config file patches defaults and keeps the rest") {
  const auto path = temp_dir() / "patch.json";
  atomic_write_file(path, R"({
    "controller": {"k_p": 0.9, "mode": "onoff"},
    "plume": {"droplet_rate_per_l": 12345.0},
    "scenario": "custom.json",
    "seeds": [5, 6]
  })");

  const AppConfig loaded = load_config_file(path, default_config());
  CHECK(loaded.controller.k_p == 0.9);
  CHECK(loaded.controller.mode == ControlMode::OnOff);
  CHECK(loaded.plume.droplet_rate_per_l == 12345.0);
  CHECK(loaded.scenario == "custom.json");
  CHECK(loaded.seeds == std::vector<std::uint64_t>{5, 6});
  // Untouched keys keep their defaults.
  CHECK(loaded.controller.thres_nozzle == 0.10);
  CHECK(loaded.valve.a_n == 1e-5);
}

TEST_CASE("flag overrides outrank the config file") {
  // Precedence is defaults < file < flags; the CLI applies flags after the
  // file load, which this mirrors.
  const auto path = temp_dir() / "prec.json";
  atomic_write_file(path, R"({"out_dir": "from_file", "jobs": 2})");
  AppConfig config = load_config_file(path, default_config());
  CHECK(config.out_dir == "from_file");
  config.out_dir = "from_flag";  // flag layer
  CHECK(config.out_dir == "from_flag");
  CHECK(config.jobs == 2);
}

TEST_CASE("config errors carry the offending key") {
  AppConfig config = default_config();
  CHECK_THROWS_WITH_AS(apply_config_text(config, R"({"controler": {}})", "t"),
                       doctest::Contains("controler"), ConfigError);
  CHECK_THROWS_WITH_AS(
      apply_config_text(config, R"({"controller": {"kp": 1}})", "t"),
      doctest::Contains("controller.kp"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(config, R"({"controller": {"mode": "x"}})", "t"),
                  ConfigError);
  CHECK_THROWS_AS(apply_config_text(config, "not json", "t"), ConfigError);
  CHECK_THROWS_AS(load_config_file(temp_dir() / "missing.json", default_config()),
                  ConfigError);
}

TEST_CASE("seed list parsing") {
  CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
  CHECK(parse_seed_list("1,2,3") == (std::vector<std::uint64_t>{1, 2, 3}));
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("-1"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("1.5"), ConfigError);
}

TEST_CASE("invalid configs are rejected on validate") {
  AppConfig config = default_config();
  config.sim.n_zones = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = default_config();
  config.seeds.clear();
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = default_config();
  config.plume.full_reach_m = 0.5;  // below the near-coverage anchor
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("atomic writes create parents and replace contents") {
  const auto path = temp_dir() / "nested" / "deep" / "file.txt";
  atomic_write_file(path, "one");
  atomic_write_file(path, "two");
  CHECK(read_file(path) == "two");
  // No temp litter left behind.
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(path.parent_path()))
    ++entries;
  CHECK(entries == 1);
}
