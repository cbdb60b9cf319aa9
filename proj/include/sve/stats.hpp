#pragma once

// Ensemble estimators with 95% normal confidence intervals, log-log rate
// regression and two-sample law comparisons. Every reduction uses pairwise
// summation over samples in index order, so results depend only on the
// sample values, never on how replications were scheduled.

#include <cstddef>
#include <json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sve/rng.hpp"

namespace sve::stats {

inline constexpr double kZ95 = 1.959963984540054;

/// Fixed-topology pairwise sum.
double pairwise_sum(std::span<const double> x);

struct Interval {
  double estimate = 0.0;
  double half_width = 0.0;

  double lo() const noexcept { return estimate - half_width; }
  double hi() const noexcept { return estimate + half_width; }
  bool overlaps(const Interval& o) const noexcept { return lo() <= o.hi() && o.lo() <= hi(); }
  bool contains(double v) const noexcept { return lo() <= v && v <= hi(); }
};

double mean(std::span<const double> x);
/// Unbiased sample variance; requires at least 2 samples.
double variance(std::span<const double> x);
Interval mean_ci(std::span<const double> x);
/// Standard error from the fourth central moment: sqrt((m4 - m2^2) / N).
Interval variance_ci(std::span<const double> x);
/// Unbiased covariance, standard error from the spread of centred products.
Interval covariance_ci(std::span<const double> a, std::span<const double> b);

struct Ensemble {
  std::string label;
  std::vector<std::vector<double>> samples;  ///< one vector per replication
  std::vector<StreamKey> seed_manifest;      ///< key of each sample, same order

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t dim() const noexcept { return samples.empty() ? 0 : samples.front().size(); }
  /// Samples of coordinate i in replication order.
  std::vector<double> coordinate(std::size_t i) const;
};

struct EnsembleSummary {
  std::string label;
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> ci;  ///< half-width of the 95% CI for the mean
};

/// Throws DomainError for fewer than 2 samples, ragged samples, or a
/// manifest that does not cover every sample.
EnsembleSummary ensemble_stats(const Ensemble& e);

struct RateFit {
  std::vector<std::pair<double, double>> points;  ///< (n, error)
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares on (log n, log error). Needs at least 3 points, strictly
/// increasing n and positive errors.
RateFit rate_regression(std::vector<std::pair<double, double>> points);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// sqrt(na nb / (na + nb)) D.
KSResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct NormalityTest {
  double statistic = 0.0;
  double p_value = 1.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Jarque-Bera test; the p-value is the chi-square(2) tail exp(-JB/2).
NormalityTest jarque_bera(std::span<const double> x);

nlohmann::json to_json(const Interval& ci);
nlohmann::json to_json(const EnsembleSummary& s);
nlohmann::json to_json(const RateFit& f);
nlohmann::json to_json(const KSResult& k);
nlohmann::json to_json(const StreamKey& k);

}  // namespace sve::stats
