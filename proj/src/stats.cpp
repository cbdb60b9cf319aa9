#include "sve/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sve/errors.hpp"

namespace sve::stats {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

namespace {

void require_samples(std::span<const double> x, std::size_t min, const char* who) {
  if (x.size() < min) {
    throw DomainError(std::string(who) + ": needs at least " + std::to_string(min) + " samples");
  }
}

// Central moment of the given order about `mu`.
double central_moment(std::span<const double> x, double mu, int order) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = std::pow(x[i] - mu, order);
  return pairwise_sum(t) / static_cast<double>(x.size());
}

}  // namespace

double mean(std::span<const double> x) {
  require_samples(x, 1, "mean");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  require_samples(x, 2, "variance");
  const double mu = mean(x);
  const double n = static_cast<double>(x.size());
  return central_moment(x, mu, 2) * n / (n - 1.0);
}

Interval mean_ci(std::span<const double> x) {
  const double v = variance(x);
  return {mean(x), kZ95 * std::sqrt(v / static_cast<double>(x.size()))};
}

Interval variance_ci(std::span<const double> x) {
  const double mu = mean(x);
  const double m2 = central_moment(x, mu, 2);
  const double m4 = central_moment(x, mu, 4);
  const double n = static_cast<double>(x.size());
  const double se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return {variance(x), kZ95 * se};
}

Interval covariance_ci(std::span<const double> a, std::span<const double> b) {
  require_samples(a, 2, "covariance_ci");
  if (a.size() != b.size()) throw DomainError("covariance_ci: sample sizes differ");
  const double ma = mean(a), mb = mean(b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  const double n = static_cast<double>(a.size());
  const double cov = pairwise_sum(prod) / (n - 1.0);
  return {cov, kZ95 * std::sqrt(variance(prod) / n)};
}

std::vector<double> Ensemble::coordinate(std::size_t i) const {
  std::vector<double> out(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) out[r] = samples[r].at(i);
  return out;
}

EnsembleSummary ensemble_stats(const Ensemble& e) {
  if (e.size() < 2) throw DomainError("ensemble_stats: needs at least 2 samples");
  for (const auto& s : e.samples) {
    if (s.size() != e.dim()) throw DomainError("ensemble_stats: samples have different lengths");
  }
  if (e.seed_manifest.size() != e.size()) {
    throw DomainError("ensemble_stats: seed manifest does not cover every sample");
  }
  EnsembleSummary out;
  out.label = e.label;
  out.count = e.size();
  for (std::size_t i = 0; i < e.dim(); ++i) {
    const auto x = e.coordinate(i);
    const Interval ci = mean_ci(x);
    out.mean.push_back(ci.estimate);
    out.variance.push_back(variance(x));
    out.ci.push_back(ci.half_width);
  }
  return out;
}

RateFit rate_regression(std::vector<std::pair<double, double>> points) {
  if (points.size() < 3) throw DomainError("rate_regression: needs at least 3 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].second > 0.0)) throw DomainError("rate_regression: errors must be positive");
    if (!(points[i].first > 0.0)) throw DomainError("rate_regression: n must be positive");
    if (i > 0 && !(points[i].first > points[i - 1].first)) {
      throw DomainError("rate_regression: n values must be strictly increasing");
    }
  }
  const std::size_t k = points.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    lx[i] = std::log(points[i].first);
    ly[i] = std::log(points[i].second);
  }
  const double mx = mean(lx), my = mean(ly);
  std::vector<double> sxy(k), sxx(k), syy(k);
  for (std::size_t i = 0; i < k; ++i) {
    sxy[i] = (lx[i] - mx) * (ly[i] - my);
    sxx[i] = (lx[i] - mx) * (lx[i] - mx);
    syy[i] = (ly[i] - my) * (ly[i] - my);
  }
  RateFit fit;
  fit.slope = pairwise_sum(sxy) / pairwise_sum(sxx);
  fit.intercept = my - fit.slope * mx;
  const double tot = pairwise_sum(syy);
  std::vector<double> res(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    res[i] = r * r;
  }
  fit.r_squared = tot > 0.0 ? 1.0 - pairwise_sum(res) / tot : 1.0;
  fit.points = std::move(points);
  return fit;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form, fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double t = 2.0 * k - 1.0;
      s += std::exp(-t * t * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KSResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: both samples must be nonempty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KSResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(na * nb / (na + nb)) * d);
  return r;
}

NormalityTest jarque_bera(std::span<const double> x) {
  require_samples(x, 3, "jarque_bera");
  const double mu = mean(x);
  const double m2 = central_moment(x, mu, 2);
  NormalityTest t;
  if (m2 == 0.0) return t;
  const double m3 = central_moment(x, mu, 3);
  const double m4 = central_moment(x, mu, 4);
  t.skewness = m3 / std::pow(m2, 1.5);
  t.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  const double n = static_cast<double>(x.size());
  t.statistic = n / 6.0 * (t.skewness * t.skewness + 0.25 * t.excess_kurtosis * t.excess_kurtosis);
  t.p_value = std::exp(-0.5 * t.statistic);
  return t;
}

nlohmann::json to_json(const Interval& ci) {
  return {{"estimate", ci.estimate}, {"half_width", ci.half_width}, {"lo", ci.lo()}, {"hi", ci.hi()}};
}

nlohmann::json to_json(const EnsembleSummary& s) {
  return {{"label", s.label}, {"n", s.count}, {"mean", s.mean}, {"var", s.variance}, {"ci", s.ci}};
}

nlohmann::json to_json(const RateFit& f) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [n, e] : f.points) pts.push_back({n, e});
  return {{"points", pts}, {"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

nlohmann::json to_json(const KSResult& k) {
  return {{"statistic", k.statistic}, {"p_value", k.p_value}};
}

nlohmann::json to_json(const StreamKey& k) {
  return {{"master_seed", k.master_seed}, {"replication", k.replication}, {"component", k.component}};
}

}  // namespace sve::stats
