// Acceptance run: criteria 1-9 at their stated sizes and tolerances, one
// PASS/FAIL line per criterion followed by the individual checks.
//
//   sve_acceptance [--only 1,3,...] [--expect-fail 5,...] [--output-dir DIR]
//
// The same report is written to DIR/acceptance.txt.
//
// The exit status is nonzero when a criterion fails that is not listed in
// --expect-fail. Listed criteria still print FAIL when they fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sve/config.hpp"
#include "sve/experiments.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace sve;

namespace {

struct Outcome {
  bool passed = false;
  std::vector<experiments::Check> checks;
};

config::ExperimentConfig base(const std::string& experiment, const std::string& out_dir) {
  config::RawConfig raw;
  raw["experiment"] = {experiment, 0};
  auto cfg = config::resolve(raw, out_dir + "/" + experiment);
  cfg.seed = 20240607;
  return cfg;
}

Outcome from_result(const experiments::ExperimentResult& r) { return {r.passed(), r.checks}; }

void set_threads(int t) {
#ifdef _OPENMP
  omp_set_num_threads(t);
#else
  (void)t;
#endif
}

std::string results_json(const config::ExperimentConfig& cfg) {
  return experiments::run(cfg).to_json(cfg).dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  std::vector<int> only, expect_fail;
  std::string out_dir = "acceptance_output";
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "Criteria whose failure is documented")->delimiter(',');
  app.add_option("--output-dir", out_dir, "Artifact directory");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());

  std::vector<std::pair<int, std::function<Outcome()>>> criteria;

  criteria.emplace_back(1, [&] {
    auto cfg = base("kernel-check", out_dir);
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(2, [&] {
    auto cfg = base("simulate", out_dir);
    cfg.self_test = true;
    cfg.replications = 100000;
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(3, [&] {
    auto cfg = base("qv-limit", out_dir);
    cfg.mode = "deterministic";
    cfg.output_dir += "/deterministic";
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(4, [&] {
    auto cfg = base("qv-limit", out_dir);
    cfg.mode = "monte-carlo";
    cfg.output_dir += "/monte-carlo";
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(5, [&] {
    auto cfg = base("strong-rate", out_dir);
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(6, [&] {
    auto cfg = base("limit-law", out_dir);
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(7, [&] {
    auto cfg = base("marchaud-check", out_dir);
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(8, [&] {
    auto cfg = base("fracparts-check", out_dir);
    const auto r = experiments::run(cfg);
    experiments::write_artifacts(cfg, r, 0.0);
    return from_result(r);
  });

  criteria.emplace_back(9, [&] {
    Outcome o{true, {}};
    auto compare = [&](const std::string& label, config::ExperimentConfig cfg) {
      set_threads(1);
      const std::string a = results_json(cfg);
      const std::string b = results_json(cfg);
      set_threads(3);
      const std::string c = results_json(cfg);
      cfg.threads = 1;  // serial replication loop
      const std::string d = results_json(cfg);
      set_threads(1);
      const bool same = a == b && a == c && a == d;
      o.passed = o.passed && same;
      o.checks.push_back({label + ": results.json identical across reruns, 1 and 3 threads, serial runner",
                          same, std::to_string(a.size()) + " bytes"});
    };
    auto qv = base("qv-limit", out_dir);
    qv.mode = "monte-carlo";
    qv.n = {16, 32, 64};
    qv.replications = 64;
    compare("qv-limit", qv);
    auto sr = base("strong-rate", out_dir);
    sr.fine_steps = 128;
    sr.n = {16, 32, 64};
    sr.replications = 48;
    compare("strong-rate", sr);
    auto ll = base("limit-law", out_dir);
    ll.n = {32};
    ll.m_ratio = 4;
    ll.replications = 64;
    compare("limit-law", ll);
    auto mc = base("marchaud-check", out_dir);
    mc.replications = 16;
    mc.cells = 512;
    compare("marchaud-check", mc);
    compare("kernel-check", base("kernel-check", out_dir));
    compare("fracparts-check", base("fracparts-check", out_dir));
    auto sim = base("simulate", out_dir);
    sim.n = {64};
    compare("simulate", sim);
    return o;
  });

  std::filesystem::create_directories(out_dir);
  std::ofstream report(out_dir + "/acceptance.txt");
  bool ok = true;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    std::string error;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.passed = false;
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool documented = expected.count(id) > 0;
    char head[128];
    std::snprintf(head, sizeof head, "criterion %d: %s%s (%.1f s)\n", id, o.passed ? "PASS" : "FAIL",
                  !o.passed && documented ? " [documented]" : "", secs);
    std::string text = head;
    if (!error.empty()) text += "    error: " + error + "\n";
    for (const auto& c : o.checks) {
      text += std::string("    ") + (c.passed ? "pass" : "FAIL") + "  " + c.name;
      if (!c.detail.empty() && c.detail.size() <= 160) text += "  " + c.detail;
      text += "\n";
    }
    if (o.passed && documented) text += "    note: listed as expected to fail but passed\n";
    std::fputs(text.c_str(), stdout);
    std::fflush(stdout);
    report << text;
    if (!o.passed && !documented) ok = false;
  }
  return ok ? 0 : 1;
}
