// svetool: command-line driver for the experiments.
//
//   svetool run <experiment> [--config file] [--key value ...]
//   svetool list-models
//
// Exit codes: 0 success, 2 configuration or resource limit, 3 numerical
// failure, 4 a threshold check failed.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sve/config.hpp"
#include "sve/errors.hpp"
#include "sve/experiments.hpp"
#include "sve/models.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitChecks = 4;

std::string default_output_dir(const std::string& experiment) {
  if (const char* env = std::getenv("SVE_OUTPUT_DIR"); env && *env) return env;
  return "results/" + experiment;
}

int list_models() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& info : sve::models::list_models()) {
    out.push_back({{"name", info.name},
                   {"d", info.d},
                   {"m", info.m},
                   {"derivative_bound", info.derivative_bound},
                   {"jacobian_check", {{"ok", info.check.ok},
                                       {"max_fd_error", info.check.max_fd_error},
                                       {"max_derivative", info.check.max_derivative}}},
                   {"note", info.note}});
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run(const std::string& experiment, const std::string& config_path,
        const std::map<std::string, std::string>& overrides) {
  sve::config::RawConfig raw;
  if (!config_path.empty()) raw = sve::config::parse_file(config_path);
  if (auto it = raw.find("experiment"); it != raw.end() && it->second.value != experiment) {
    throw sve::ConfigError("config file names experiment '" + it->second.value + "' but '" + experiment +
                               "' was requested",
                           "experiment", it->second.line);
  }
  raw["experiment"] = {experiment, 0};
  for (const auto& [key, value] : overrides) raw[key] = {value, 0};
  const auto cfg = sve::config::resolve(raw, default_output_dir(experiment));

#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

  const auto start = std::chrono::steady_clock::now();
  const auto result = sve::experiments::run(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  sve::experiments::write_artifacts(cfg, result, wall);

  for (const auto& c : result.checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
    std::cout << '\n';
  }
  std::cout << "results written to " << cfg.output_dir << '\n';
  return result.passed() ? 0 : kExitChecks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and limit theorems for stochastic Volterra equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sve::experiments::kVersion);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its artifacts");
  std::string experiment;
  std::string config_path;
  run_cmd->add_option("experiment", experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(sve::config::kExperiments));
  run_cmd->add_option("--config", config_path, "Key = value configuration file")->check(CLI::ExistingFile);

  // One option per configuration key; command-line values override the file.
  std::map<std::string, std::string> values;
  for (const auto& key : sve::config::known_keys()) {
    if (key == "experiment") continue;
    std::string names = "--" + key;
    if (key.find('_') != std::string::npos) {
      std::string dashed = key;
      for (auto& ch : dashed) {
        if (ch == '_') ch = '-';
      }
      names += ",--" + dashed;
    }
    run_cmd->add_option(names, values[key], "Overrides '" + key + "' from the config file");
  }

  auto* list_cmd = app.add_subcommand("list-models", "Print the built-in coefficient models as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (list_cmd->parsed()) return list_models();
    std::map<std::string, std::string> overrides;
    for (const auto& [key, value] : values) {
      if (run_cmd->count("--" + key) > 0) overrides[key] = value;
    }
    return run(experiment, config_path, overrides);
  } catch (const sve::ConfigError& e) {
    std::cerr << "configuration error";
    if (!e.field().empty()) std::cerr << " (" << e.field() << ")";
    std::cerr << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const sve::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sve::DivergenceError& e) {
    std::cerr << "divergence at step " << e.step() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const sve::FactorizationError& e) {
    std::cerr << "factorization failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const sve::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const sve::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
