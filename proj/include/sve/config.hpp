#pragma once

// Experiment configuration: flat `key = value` text with `#` comments,
// overridable by command-line flags of the same names.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sve/quadrature.hpp"

namespace sve::config {

/// Raw value with the config-file line it came from (0 = command line).
struct RawValue {
  std::string value;
  std::size_t line = 0;
};

using RawConfig = std::map<std::string, RawValue>;

/// Every accepted key, in documentation order.
const std::vector<std::string>& known_keys();

/// Parses `key = value` lines. Unknown keys, missing `=` and duplicate keys
/// raise ConfigError with the line number.
RawConfig parse(std::istream& in);
RawConfig parse_file(const std::string& path);

inline const std::vector<std::string> kExperiments{
    "kernel-check", "qv-limit", "strong-rate", "limit-law", "marchaud-check", "fracparts-check",
    "simulate"};

struct ExperimentConfig {
  std::string experiment;
  std::vector<double> H;           ///< empty = experiment default
  double T = 1.0;
  std::vector<std::size_t> n;      ///< empty = experiment default
  std::size_t m_ratio = 8;
  std::size_t fine_steps = 1024;   ///< strong-rate reference resolution
  std::vector<std::string> model;  ///< empty = experiment default
  std::optional<std::size_t> replications;
  std::uint64_t seed = 1;
  std::string output_dir;
  std::size_t low_rank = 0;        ///< 0 = full factorization
  QuadratureConfig quadrature;
  int threads = 0;                 ///< 0 = OpenMP default
  std::string mode = "both";       ///< qv-limit: deterministic, monte-carlo or both
  std::string qv_rule = "power";   ///< power or trapezoid
  std::size_t cells = 4096;        ///< marchaud-check grid
  std::size_t max_fine_steps = 8192;
  bool self_test = false;          ///< simulate: run the covariance self-test
  std::string factor_cache;        ///< directory for cached factors, empty = off

  /// Fields that determine the results (no output directory or threads).
  nlohmann::json to_json() const;
};

/// Validates and converts; `default_output_dir` applies when output_dir is
/// not set.
ExperimentConfig resolve(const RawConfig& raw, const std::string& default_output_dir);

}  // namespace sve::config
