#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "sve/analysis.hpp"
#include "sve/errors.hpp"
#include "sve/gaussian.hpp"
#include "sve/models.hpp"
#include "sve/scheme.hpp"
#include "sve/stats.hpp"

using namespace sve;
using kernel::KernelParams;

namespace {

gaussian::FactorizedCovariance factor(const KernelParams& p, std::size_t n) {
  return gaussian::factorize(gaussian::build_covariance(p, n));
}

}  // namespace

TEST(Models, BuiltinJacobiansAgreeWithFiniteDifferences) {
  for (const auto& name : models::builtin_names()) {
    const auto m = models::make(name);
    const auto c = scheme::check_model(m);
    EXPECT_TRUE(c.ok) << name << " fd error " << c.max_fd_error;
    EXPECT_LE(c.max_derivative, m.derivative_bound + 1e-12) << name;
  }
  EXPECT_THROW(models::make("nope"), ConfigError);
  const auto info = models::list_models();
  ASSERT_GE(info.size(), 3u);
  EXPECT_EQ(info[0].name, "linear");
}

TEST(Models, PlanarCoefficients) {
  const auto m = models::planar();
  ASSERT_EQ(m.d, 2);
  ASSERT_EQ(m.m, 2);
  scheme::Vec x(2);
  x << 0.3, -1.2;
  const auto s = m.sigma(x);
  EXPECT_DOUBLE_EQ(s(0, 0), 2.0 + std::sin(0.3));
  EXPECT_DOUBLE_EQ(s(0, 1), 0.5 * std::cos(-1.2));
  EXPECT_DOUBLE_EQ(s(1, 0), 0.3);
  EXPECT_DOUBLE_EQ(s(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.b(x)(1), 0.1 * std::tanh(-1.2));
}

TEST(StepDraws, LayoutAndAggregation) {
  const auto p = KernelParams::make(0.25, 1.0);
  const std::size_t N = 12, n = 3, m = 4;
  const auto f = factor(p, N);
  const auto fine = scheme::draw_steps(f, N, 2, StreamKey{1, 0, 0, 0});
  EXPECT_EQ(fine.steps(), N);
  for (std::size_t k = 1; k <= N; ++k) EXPECT_EQ(fine.at(k, 1).size(), N - k + 2);
  const auto coarse = scheme::aggregate_fine_to_coarse(fine, n, m);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t k = 1; k <= n; ++k) {
      double plain = 0.0;
      for (std::size_t q = (k - 1) * m + 1; q <= k * m; ++q) plain += fine.plain(q, c);
      EXPECT_NEAR(coarse.plain(k, c), plain, 1e-14);
    }
  }
  // Components draw from disjoint keys.
  EXPECT_NE(fine.plain(1, 0), fine.plain(1, 1));
}

TEST(StepDraws, AggregatedDrawsHaveCoarseCovariance) {
  const auto p = KernelParams::make(0.25, 1.0);
  const std::size_t n = 3, m = 4, R = 100000;
  const auto f = factor(p, n * m);
  const auto target = gaussian::build_covariance(p, n);
  const std::size_t dim = n + 1;
  std::vector<double> s1(dim * dim, 0.0), s2(dim * dim, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    const auto fine = scheme::draw_steps(f, n * m, 1, StreamKey{77, r, 0, 0});
    const auto coarse = scheme::aggregate_fine_to_coarse(fine, n, m);
    const auto x = coarse.at(1, 0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        s1[i * dim + j] += x[i] * x[j];
        s2[i * dim + j] += x[i] * x[j] * x[i] * x[j];
      }
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double mean = s1[i * dim + j] / R;
      const double se = std::sqrt((s2[i * dim + j] / R - mean * mean) / R);
      EXPECT_LT(std::abs(mean - target(i, j)), 4.5 * se) << i << "," << j;
    }
  }
}

TEST(Scheme, ConstantCoefficientsGiveAnalyticSolution) {
  const auto p = KernelParams::make(0.2, 2.0);
  const std::size_t n = 40;
  const auto model = models::constant(0.3, 1.7, 0.25);
  const auto draws = scheme::draw_steps(factor(p, n), n, 1, StreamKey{3, 0, 0, 0});
  const auto path = scheme::simulate_hat_X(model, p, n, draws);
  ASSERT_EQ(path.size(), n + 1);
  EXPECT_EQ(path(0, 0), 0.25);
  for (std::size_t k = 1; k <= n; ++k) {
    double noise = 0.0;
    for (std::size_t q = 1; q <= k; ++q) noise += draws.at(q, 0)[k - q + 1];
    const double exact = 0.25 + 0.3 * kernel::int_K(p, 0.0, path.times[k]) + 1.7 * noise;
    EXPECT_NEAR(path(k, 0), exact, 1e-13 * (1.0 + std::abs(exact)));
  }
  EXPECT_DOUBLE_EQ(path.times[n], 2.0);
}

TEST(Scheme, OneStepVarianceOfMultiplicativeNoise) {
  const auto p = KernelParams::make(0.25, 1.0);
  const auto model = models::scalar(
      "mult", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double x) { return x; },
      [](double) { return 1.0; }, 1.3, 1.0);
  const auto f = factor(p, 1);
  const std::size_t R = 100000;
  std::vector<double> x1(R);
  for (std::size_t r = 0; r < R; ++r) {
    x1[r] = scheme::simulate_hat_X(model, p, 1, scheme::draw_steps(f, 1, 1, StreamKey{11, r, 0, 0}))(1, 0);
  }
  const auto ci = stats::variance_ci(x1);
  const double expected = 1.3 * 1.3 * kernel::int_K2(p, 0.0, 1.0);
  EXPECT_LT(std::abs(ci.estimate - expected), 4.0 * ci.half_width / stats::kZ95);
}

TEST(Scheme, EulerHandExpansionTwoSteps) {
  const auto p = KernelParams::make(0.3, 1.0);
  const auto model = models::constant(0.0, 1.0, 0.4);
  const std::vector<double> dW{0.7, -0.2};
  const auto path = scheme::simulate_euler(model, p, 2, dW);
  const double delta = 0.5;
  EXPECT_NEAR(path(2, 0), 0.4 + kernel::eval_K(p, 2 * delta) * 0.7 + kernel::eval_K(p, delta) * -0.2, 1e-15);
  EXPECT_NEAR(path(1, 0), 0.4 + kernel::eval_K(p, delta) * 0.7, 1e-15);
}

TEST(Scheme, HalfIsEulerForBrownianDriver) {
  // K = 1: the exact-increment scheme and Euler coincide on the plain increments.
  const auto p = KernelParams::make(0.5, 1.0);
  const std::size_t n = 30;
  const auto model = models::trig(0.2);
  const auto draws = scheme::draw_steps(factor(p, n), n, 1, StreamKey{5, 0, 0, 0});
  const auto hat = scheme::simulate_hat_X(model, p, n, draws);
  const auto euler = scheme::simulate_euler(model, p, n, scheme::plain_increments(draws));
  for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(hat(k, 0), euler(k, 0), 1e-12);
}

TEST(Scheme, DivergenceGuardNamesStep) {
  const auto p = KernelParams::make(0.25, 1.0);
  const auto model = models::scalar(
      "blowup", [](double x) { return 1e3 * x * x; }, [](double x) { return 2e3 * x; },
      [](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 1.0);
  const auto draws = scheme::draw_steps(factor(p, 16), 16, 1, StreamKey{1, 0, 0, 0});
  try {
    scheme::simulate_hat_X(model, p, 16, draws);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 1u);
    EXPECT_LE(e.step(), 16u);
  }
}

TEST(Coupling, NormalizedErrorFromStoredValues) {
  const auto p = KernelParams::make(0.25, 1.0);
  const std::size_t n = 8, m = 4;
  const auto model = models::planar();
  const auto f = factor(p, n * m);
  const scheme::CoupledSimulator sim(model, p, n, m, f);
  const auto run = sim.run(StreamKey{21, 3, 0, 0});
  ASSERT_EQ(run.fine.size(), n * m + 1);
  ASSERT_EQ(run.coarse.size(), n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    EXPECT_EQ(run.fine.times[k * m], run.coarse.times[k]);
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(run.u_n(k, i), std::pow(double(n), 0.25) * (run.fine(k * m, i) - run.coarse(k, i)));
    }
  }
  EXPECT_EQ(run.u_n(0, 0), 0.0);
  EXPECT_EQ(run.fine(0, 0), model.X0(0));
}

TEST(Coupling, ResourceLimit) {
  const auto p = KernelParams::make(0.25, 1.0);
  scheme::SimulationLimits lim;
  lim.max_fine_steps = 64;
  EXPECT_THROW(scheme::simulate_coupled(models::trig(), p, 16, 8, StreamKey{}, lim), ResourceLimitError);
}

TEST(BetweenGrid, HalfConstantSigmaIsBrownianIncrement) {
  const auto p = KernelParams::make(0.5, 1.0);
  const std::size_t n = 6, m = 5;
  const auto model = models::constant(0.0, 1.4, 0.0);
  const auto run = scheme::simulate_coupled(model, p, n, m, StreamKey{8, 0, 0, 0});
  for (std::size_t i = 0; i <= n * m; ++i) {
    const std::size_t k = i / m;
    double dw = 0.0;
    for (std::size_t q = k * m + 1; q <= i; ++q) dw += run.fine_draws.plain(q, 0);
    const auto v = scheme::evaluate_hat_between(model, p, run, i);
    EXPECT_NEAR(v(0) - run.coarse(k, 0), 1.4 * dw, 1e-13);
  }
}

TEST(BetweenGrid, PathAgreesWithPointwiseAndCoarseGrid) {
  const auto p = KernelParams::make(0.25, 1.0);
  const std::size_t n = 5, m = 4;
  const auto model = models::trig();
  const auto run = scheme::simulate_coupled(model, p, n, m, StreamKey{9, 1, 0, 0});
  const auto path = scheme::hat_between_path(model, p, run);
  for (std::size_t i = 0; i <= n * m; ++i) {
    EXPECT_NEAR(path(i, 0), scheme::evaluate_hat_between(model, p, run, i)(0), 1e-13);
    if (i % m == 0) {
      EXPECT_NEAR(path(i, 0), run.coarse(i / m, 0), 1e-13);
    }
  }
}

TEST(Coupling, ReferenceRefinementSmallerThanResolutionChange) {
  // One set of draws at N = 128 serves references at m = 4 and m = 8.
  const auto p = KernelParams::make(0.25, 1.0);
  const auto model = models::scalar(
      "sin2", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double x) { return std::sin(x) + 2.0; },
      [](double x) { return std::cos(x); }, 0.0, 1.0);
  const std::size_t N = 128, n = 16, R = 300;
  const auto f = factor(p, N);
  std::vector<double> refine(R), resolution(R);
  for (std::size_t r = 0; r < R; ++r) {
    const auto d128 = scheme::draw_steps(f, N, 1, StreamKey{31, r, 0, 0});
    auto solve = [&](std::size_t steps) {
      return scheme::simulate_hat_X(model, p, steps, scheme::aggregate_fine_to_coarse(d128, steps, N / steps))(steps, 0);
    };
    const double x128 = scheme::simulate_hat_X(model, p, N, d128)(N, 0);
    const double x64 = solve(64), x32 = solve(32), x16 = solve(16);
    const double sn = std::pow(double(n), 0.25), s2n = std::pow(2.0 * n, 0.25);
    refine[r] = sn * (x128 - x16) - sn * (x64 - x16);
    resolution[r] = s2n * (x128 - x32) - sn * (x128 - x16);
  }
  auto rms = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / v.size());
  };
  EXPECT_LT(rms(refine), rms(resolution));
  EXPECT_GT(rms(resolution), 0.0);
}

TEST(Scheme, NormalizedErrorStabilizesAsNDoubles) {
  const auto p = KernelParams::make(0.25, 1.0);
  const auto model = models::scalar(
      "sin2", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double x) { return std::sin(x) + 2.0; },
      [](double x) { return std::cos(x); }, 0.0, 1.0);
  const std::size_t R = 400, m = 4;
  std::vector<double> rms;
  for (std::size_t n : {8, 16, 32}) {
    const auto f = factor(p, n * m);
    const scheme::CoupledSimulator sim(model, p, n, m, f);
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double u = sim.run(StreamKey{41, r, 0, 0}).u_n(n, 0);
      s += u * u;
    }
    rms.push_back(std::sqrt(s / R));
  }
  for (double v : rms) EXPECT_GT(v, 0.1);
  EXPECT_LT(rms[2] / rms[0], 1.5);
  EXPECT_GT(rms[2] / rms[0], 0.67);
}

TEST(GridPath, CsvHeaderAndRoundTrip) {
  scheme::GridPath path;
  path.d = 2;
  path.times = {0.0, 0.5};
  path.values = {1.0, 0.1, 1.0 / 3.0, -2.5e-300};
  std::ostringstream os;
  scheme::write_csv(os, path);
  std::istringstream is(os.str());
  std::string header, row0, row1;
  std::getline(is, header);
  std::getline(is, row0);
  std::getline(is, row1);
  EXPECT_EQ(header, "t,x1,x2");
  EXPECT_EQ(row0, "0,1,0.1");
  const auto comma = row1.find(',');
  const auto comma2 = row1.find(',', comma + 1);
  EXPECT_EQ(std::stod(row1.substr(comma + 1, comma2 - comma - 1)), 1.0 / 3.0);
  EXPECT_EQ(std::stod(row1.substr(comma2 + 1)), -2.5e-300);
}

TEST(Scheme, HolderNormsOfPathsStableAcrossResolution) {
  const auto p = KernelParams::make(0.4, 1.0);
  const auto model = models::trig();
  const std::size_t R = 200;
  std::vector<stats::Interval> cis;
  for (std::size_t n : {64, 128}) {
    const auto f = factor(p, n);
    std::vector<double> norms(R);
    for (std::size_t r = 0; r < R; ++r) {
      const auto path = scheme::simulate_hat_X(model, p, n, scheme::draw_steps(f, n, 1, StreamKey{51, r, 0, 0}));
      norms[r] = analysis::holder_norm(path, 0.1).value;
    }
    cis.push_back(stats::mean_ci(norms));
  }
  EXPECT_TRUE(cis[0].overlaps(cis[1])) << cis[0].estimate << " vs " << cis[1].estimate;
}
