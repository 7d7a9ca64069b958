#pragma once

#include <stdexcept>
#include <string>

namespace spraysim {

// Bad option values, unknown modes, unreadable config files. CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario validation failures: missing rasters, violated zone invariants.
// CLI exit code 2.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed raster files and other I/O-level failures. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spraysim
