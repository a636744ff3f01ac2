#pragma once

// Command-line front end: run configuration, builtin inputs and the named
// checks behind `gsq verify`.
//
// Precedence: built-in defaults, then the JSON config file, then flags.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsq/grid.hpp"
#include "gsq/quantize.hpp"

namespace gsq::cli {

/// Bad flags, malformed or inconsistent configuration, unreadable inputs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFail = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  int d = 1;
  std::size_t n = 32;
  std::optional<double> L;  // unset: balanced half width sqrt(pi n / 2)
  double s = 0.5;
  double sigma = 0.5;
  std::vector<double> h_ladder{0.125, 0.25, 0.5};
  std::vector<double> r_ladder{0.05, 0.1, 0.2};
  std::vector<double> q{1.0, 2.0, std::numeric_limits<double>::infinity()};
  std::string matrix = "t=0.5";
  std::string route = "kernel";
  std::string window = "gaussian";
  std::size_t memory_bytes = std::size_t{2} << 30;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";
  int cutoff = 4;
  std::optional<double> tolerance;

  /// Throws ConfigError on odd or zero n, d outside {1, 2}, empty or
  /// non-positive ladders, unknown route, bad matrix text.
  void validate() const;
  double half_width() const;
  Grid base_grid() const;
  QuantMatrix quant_matrix() const;
  nlohmann::json to_json() const;

  /// Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
};

/// "gaussian", "hermite:k" on the base grid; "gauss2d", "one",
/// "growth:r=..,s=..[,sigma=..]" on its phase-space grid.
SampledFunction builtin(const std::string& name, const RunConfig& cfg);
bool is_builtin(const std::string& name);

/// A GSQ1 file (or .json array file) if the path exists, else a builtin.
SampledFunction load_input(const std::string& spec, const RunConfig& cfg);

/// Window for a function on `grid`: the configured window resampled to that grid.
SampledFunction make_window(const Grid& grid, const RunConfig& cfg);

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name);

struct CheckReport {
  std::string check;
  double max_dev = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json details;
  nlohmann::json to_json() const;
};

const std::vector<std::string>& check_names();

/// Runs one named check at the scale of `cfg`.  Throws ConfigError for an
/// unknown name.
CheckReport run_check(const std::string& name, const RunConfig& cfg);

/// Entry point shared by the executable and the tests; returns the exit code.
int run(int argc, char** argv);

}  // namespace gsq::cli
