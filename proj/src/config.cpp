#include "sve/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sve/errors.hpp"
#include "sve/models.hpp"

namespace sve::config {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "experiment", "H",        "T",           "n",          "m_ratio",    "fine_steps",
      "model",      "replications", "seed",    "output_dir", "low_rank",   "quad_abs_tol",
      "quad_rel_tol", "quad_max_subdivisions", "quad_tail_cutoff", "threads", "mode",
      "qv_rule",    "cells",    "max_fine_steps", "self_test", "factor_cache"};
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_known(const std::string& key) {
  const auto& k = known_keys();
  return std::find(k.begin(), k.end(), key) != k.end();
}

[[noreturn]] void bad(const std::string& field, const RawValue& v, const std::string& why) {
  std::ostringstream msg;
  if (v.line > 0) msg << "line " << v.line << ": ";
  msg << "invalid value '" << v.value << "' for " << field << ": " << why;
  throw ConfigError(msg.str(), field, v.line);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& field, const RawValue& v, const std::string& text) {
  double out = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) bad(field, v, "not a number");
  return out;
}

std::uint64_t to_uint(const std::string& field, const RawValue& v, const std::string& text) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    bad(field, v, "not a nonnegative integer");
  }
  return out;
}

bool to_bool(const std::string& field, const RawValue& v) {
  if (v.value == "true" || v.value == "1" || v.value == "yes") return true;
  if (v.value == "false" || v.value == "0" || v.value == "no") return false;
  bad(field, v, "expected true or false");
}

}  // namespace

RawConfig parse(std::istream& in) {
  RawConfig out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'", "", number);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!is_known(key)) {
      throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'", key, number);
    }
    if (out.count(key)) {
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'", key, number);
    }
    out[key] = {value, number};
  }
  return out;
}

RawConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "config");
  return parse(in);
}

ExperimentConfig resolve(const RawConfig& raw, const std::string& default_output_dir) {
  ExperimentConfig c;
  auto get = [&](const std::string& key) -> const RawValue* {
    const auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };
  for (const auto& [key, v] : raw) {
    if (!is_known(key)) throw ConfigError("unknown key '" + key + "'", key, v.line);
  }

  const RawValue* v = get("experiment");
  if (!v || v->value.empty()) throw ConfigError("no experiment given", "experiment");
  if (std::find(kExperiments.begin(), kExperiments.end(), v->value) == kExperiments.end()) {
    bad("experiment", *v, "unknown experiment");
  }
  c.experiment = v->value;

  if ((v = get("H"))) {
    for (const auto& item : split_list(v->value)) {
      const double h = to_double("H", *v, item);
      if (!(h > 0.0 && h <= 0.5)) bad("H", *v, "H must lie in (0, 1/2]");
      c.H.push_back(h);
    }
    if (c.H.empty()) bad("H", *v, "empty list");
  }
  if ((v = get("T"))) {
    c.T = to_double("T", *v, v->value);
    if (!(c.T > 0.0)) bad("T", *v, "T must be positive");
  }
  if ((v = get("n"))) {
    for (const auto& item : split_list(v->value)) {
      const auto n = to_uint("n", *v, item);
      if (n < 1) bad("n", *v, "n must be at least 1");
      if (!c.n.empty() && n <= c.n.back()) bad("n", *v, "n values must be strictly increasing");
      c.n.push_back(n);
    }
    if (c.n.empty()) bad("n", *v, "empty list");
  }
  if ((v = get("m_ratio"))) {
    c.m_ratio = to_uint("m_ratio", *v, v->value);
    if (c.m_ratio < 2) bad("m_ratio", *v, "m_ratio must be at least 2");
  }
  if ((v = get("fine_steps"))) {
    c.fine_steps = to_uint("fine_steps", *v, v->value);
    if (c.fine_steps < 2) bad("fine_steps", *v, "fine_steps must be at least 2");
  }
  if ((v = get("model"))) {
    for (const auto& item : split_list(v->value)) {
      const auto& names = models::builtin_names();
      if (std::find(names.begin(), names.end(), item) == names.end()) {
        bad("model", *v, "unknown model '" + item + "'");
      }
      c.model.push_back(item);
    }
    if (c.model.empty()) bad("model", *v, "empty list");
  }
  if ((v = get("replications"))) {
    c.replications = to_uint("replications", *v, v->value);
    if (*c.replications < 1) bad("replications", *v, "replications must be at least 1");
  }
  if ((v = get("seed"))) c.seed = to_uint("seed", *v, v->value);
  c.output_dir = default_output_dir;
  if ((v = get("output_dir"))) {
    if (v->value.empty()) bad("output_dir", *v, "empty path");
    c.output_dir = v->value;
  }
  if ((v = get("low_rank"))) c.low_rank = to_uint("low_rank", *v, v->value);
  if ((v = get("quad_abs_tol"))) c.quadrature.abs_tol = to_double("quad_abs_tol", *v, v->value);
  if ((v = get("quad_rel_tol"))) c.quadrature.rel_tol = to_double("quad_rel_tol", *v, v->value);
  if ((v = get("quad_max_subdivisions"))) {
    c.quadrature.max_subdivisions = to_uint("quad_max_subdivisions", *v, v->value);
  }
  if ((v = get("quad_tail_cutoff"))) {
    c.quadrature.tail_cutoff = to_double("quad_tail_cutoff", *v, v->value);
  }
  try {
    c.quadrature.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("quadrature settings: ") + e.what(), "quadrature");
  }
  if ((v = get("threads"))) c.threads = static_cast<int>(to_uint("threads", *v, v->value));
  if ((v = get("mode"))) {
    if (v->value != "deterministic" && v->value != "monte-carlo" && v->value != "both") {
      bad("mode", *v, "expected deterministic, monte-carlo or both");
    }
    c.mode = v->value;
  }
  if ((v = get("qv_rule"))) {
    if (v->value != "power" && v->value != "trapezoid") bad("qv_rule", *v, "expected power or trapezoid");
    c.qv_rule = v->value;
  }
  if ((v = get("cells"))) {
    c.cells = to_uint("cells", *v, v->value);
    if (c.cells < 2) bad("cells", *v, "cells must be at least 2");
  }
  if ((v = get("max_fine_steps"))) c.max_fine_steps = to_uint("max_fine_steps", *v, v->value);
  if ((v = get("self_test"))) c.self_test = to_bool("self_test", *v);
  if ((v = get("factor_cache"))) c.factor_cache = v->value;
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["H"] = H;
  j["T"] = T;
  j["n"] = n;
  j["m_ratio"] = m_ratio;
  j["fine_steps"] = fine_steps;
  j["model"] = model;
  j["replications"] = replications ? nlohmann::json(*replications) : nlohmann::json(nullptr);
  j["seed"] = seed;
  j["low_rank"] = low_rank;
  j["quadrature"] = {{"abs_tol", quadrature.abs_tol},
                     {"rel_tol", quadrature.rel_tol},
                     {"max_subdivisions", quadrature.max_subdivisions},
                     {"tail_cutoff", quadrature.tail_cutoff}};
  j["mode"] = mode;
  j["qv_rule"] = qv_rule;
  j["cells"] = cells;
  j["max_fine_steps"] = max_fine_steps;
  j["self_test"] = self_test;
  return j;
}

}  // namespace sve::config
