#pragma once

// The reproducible experiments behind `svetool run`. Each returns its
// results as JSON plus CSV tables and a list of named threshold checks;
// nothing in the results depends on timing or on the number of threads.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sve/config.hpp"
#include "sve/csv.hpp"
#include "sve/gaussian.hpp"
#include "sve/kernel.hpp"
#include "sve/scheme.hpp"

namespace sve::experiments {

inline constexpr const char* kVersion = "1.0.0";

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::pair<std::string, csv::Table>> tables;
  std::vector<Check> checks;

  bool passed() const;
  /// results.json payload.
  nlohmann::json to_json(const config::ExperimentConfig& cfg) const;
};

/// Stream seed for one ensemble of an experiment.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Full factorization, or the rank-r projection when cfg.low_rank > 0, with
/// the optional on-disk cache.
gaussian::FactorizedCovariance make_factor(const config::ExperimentConfig& cfg,
                                           const kernel::KernelParams& p, std::size_t n);

csv::Table path_table(const scheme::GridPath& path);

ExperimentResult kernel_check(const config::ExperimentConfig& cfg);
ExperimentResult simulate(const config::ExperimentConfig& cfg);
ExperimentResult qv_limit(const config::ExperimentConfig& cfg);
ExperimentResult strong_rate(const config::ExperimentConfig& cfg);
ExperimentResult limit_law(const config::ExperimentConfig& cfg);
ExperimentResult marchaud_check(const config::ExperimentConfig& cfg);
ExperimentResult fracparts_check(const config::ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
ExperimentResult run(const config::ExperimentConfig& cfg);

/// Writes results.json, manifest.json and the CSV tables to cfg.output_dir.
void write_artifacts(const config::ExperimentConfig& cfg, const ExperimentResult& result,
                     double wall_seconds);

}  // namespace sve::experiments
