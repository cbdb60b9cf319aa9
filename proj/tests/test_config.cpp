#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "sve/config.hpp"
#include "sve/csv.hpp"
#include "sve/errors.hpp"

using namespace sve;

namespace {

config::ExperimentConfig resolve_text(const std::string& text) {
  std::istringstream in(text);
  return config::resolve(config::parse(in), "out");
}

std::size_t error_line(const std::string& text) {
  try {
    resolve_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

std::string error_field(const std::string& text) {
  try {
    resolve_text(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesListsCommentsAndDefaults) {
  const auto c = resolve_text(
      "# strong rate sweep\n"
      "experiment = strong-rate\n"
      "H = 0.25, 0.4   # two roughness levels\n"
      "n = 16,32,64\n"
      "model = linear, trig\n"
      "seed = 99\n"
      "\n"
      "replications = 10\n");
  EXPECT_EQ(c.experiment, "strong-rate");
  EXPECT_EQ(c.H, (std::vector<double>{0.25, 0.4}));
  EXPECT_EQ(c.n, (std::vector<std::size_t>{16, 32, 64}));
  EXPECT_EQ(c.model, (std::vector<std::string>{"linear", "trig"}));
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(*c.replications, 10u);
  EXPECT_EQ(c.m_ratio, 8u);
  EXPECT_EQ(c.fine_steps, 1024u);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_EQ(c.qv_rule, "power");
  EXPECT_FALSE(c.to_json().contains("output_dir"));
}

TEST(Config, ErrorsNameFieldAndLine) {
  EXPECT_EQ(error_line("experiment = simulate\nH = 0.7\n"), 2u);
  EXPECT_EQ(error_field("experiment = simulate\nH = 0.7\n"), "H");
  EXPECT_EQ(error_line("experiment = simulate\n\nbogus = 1\n"), 3u);
  EXPECT_EQ(error_line("experiment = simulate\nseed = 1\nseed = 2\n"), 3u);
  EXPECT_EQ(error_line("experiment = simulate\nmodel trig\n"), 2u);
  EXPECT_EQ(error_field("experiment = simulate\nn = 32, 16\n"), "n");
  EXPECT_EQ(error_field("experiment = simulate\nmodel = heston\n"), "model");
  EXPECT_EQ(error_field("experiment = simulate\nreplications = 0\n"), "replications");
  EXPECT_EQ(error_field("experiment = simulate\nm_ratio = 1\n"), "m_ratio");
  EXPECT_EQ(error_field("experiment = simulate\nquad_rel_tol = -1\nquad_abs_tol = 0\n"), "quadrature");
  EXPECT_EQ(error_field("experiment = nothing\n"), "experiment");
  EXPECT_EQ(error_field("H = 0.2\n"), "experiment");
  EXPECT_EQ(error_field("experiment = simulate\nT = abc\n"), "T");
}

TEST(Config, AcceptsBoundaryValues) {
  const auto c = resolve_text("experiment = kernel-check\nH = 0.5\nself_test = yes\nmode = deterministic\n");
  EXPECT_EQ(c.H.front(), 0.5);
  EXPECT_TRUE(c.self_test);
  EXPECT_EQ(c.mode, "deterministic");
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(csv::format(0.1), "0.1");
  EXPECT_EQ(csv::format(1.0), "1");
  EXPECT_EQ(csv::format(-2.5e-300), "-2.5e-300");
  for (double v : {1.0 / 3.0, std::nextafter(1.0, 2.0), 6.02214076e23, std::numeric_limits<double>::min()}) {
    EXPECT_EQ(std::stod(csv::format(v)), v);
  }
  csv::Table t;
  t.add_column("n", {16, 32});
  t.add_column("err", {0.5, 0.25});
  std::ostringstream os;
  t.write(os);
  EXPECT_EQ(os.str(), "n,err\n16,0.5\n32,0.25\n");
  EXPECT_THROW(t.add_column("bad", {1.0}), DomainError);
}
