#pragma once

// Joint law of one step's Brownian increment and its kernel-weighted
// integrals towards every later grid time, and the machinery to sample it.
//
// Index layout of the augmented (n+1) x (n+1) table for a step [0, delta]:
//   0      plain increment W_delta                          variance delta
//   i >= 1 int_0^delta K(i delta - s) dW_s                  Sigma_ii
// Cross terms: cov(0, i) = int_K((i-1) delta, i delta) and
// cov(i, j) = int_0^delta K(i delta - s) K(j delta - s) ds.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sve/kernel.hpp"
#include "sve/rng.hpp"

namespace sve::gaussian {

class CovarianceTable {
 public:
  CovarianceTable() = default;
  CovarianceTable(std::size_t n, double delta, std::vector<double> entries);

  std::size_t steps() const noexcept { return n_; }
  std::size_t dim() const noexcept { return n_ + 1; }
  double delta() const noexcept { return delta_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim() + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

  double trace() const;
  double frobenius_norm() const;
  /// Smallest eigenvalue (dense symmetric solver); used for PSD checks.
  double min_eigenvalue() const;

 private:
  std::size_t n_ = 0;
  double delta_ = 0.0;
  std::vector<double> entries_;
};

/// O(n^2) quadrature calls, parallel over rows.
CovarianceTable build_covariance(const kernel::KernelParams& p, std::size_t n,
                                 const QuadratureConfig& q = {});
/// Single-threaded reference for build_covariance; identical output.
CovarianceTable build_covariance_serial(const kernel::KernelParams& p, std::size_t n,
                                        const QuadratureConfig& q = {});

struct RegularizationPolicy {
  /// Diagonal jitter escalation, in units of trace / (n+1).
  std::vector<double> jitter_levels{1e-14, 1e-12, 1e-10};
  /// Pivots whose excess over the applied jitter is at or below
  /// rank_threshold * max pivot do not count towards the effective rank.
  double rank_threshold = 1e-12;
  bool parallel = true;
};

class FactorizedCovariance {
 public:
  FactorizedCovariance() = default;
  FactorizedCovariance(std::size_t rows, std::size_t cols, std::vector<double> factor);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return factor_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(factor_).subspan(i * cols_, cols_);
  }
  std::span<const double> data() const noexcept { return factor_; }

  /// Columns beyond `active_columns` carry only jitter-level variance and
  /// are skipped when sampling.
  std::size_t active_columns = 0;
  std::size_t effective_rank = 0;
  double regularization_used = 0.0;  ///< absolute diagonal shift
  double jitter_level = 0.0;         ///< the escalation level that succeeded
  bool lower_triangular = true;
  /// Frobenius error of the approximation relative to the table; filled by
  /// low_rank_project.
  double relative_error = 0.0;
  std::vector<double> pivots;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> factor_;
};

FactorizedCovariance factorize(const CovarianceTable& table, const RegularizationPolicy& reg = {});

/// Best rank-r PSD approximation from the truncated eigendecomposition,
/// returned as a (n+1) x r factor.
FactorizedCovariance low_rank_project(const CovarianceTable& table, std::size_t r);

/// || F F^T - table ||_F over the full table.
double reconstruction_error(const FactorizedCovariance& f, const CovarianceTable& table);

/// Number of normals consumed per step.
std::size_t normals_per_step(const FactorizedCovariance& f);

/// Leading (remaining+1) coordinates of F z with z drawn from `key`.
std::vector<double> sample_step(const FactorizedCovariance& f, std::size_t remaining,
                                const StreamKey& key);

/// Allocation-free variant; `z` must hold normals_per_step(f) values.
void sample_step_into(const FactorizedCovariance& f, std::size_t remaining, const StreamKey& key,
                      std::span<double> out, std::span<double> z);

// Binary cache of factors, little-endian:
//   u64 magic "SVEFCOV1", u64 version, f64 H, u64 n, f64 T,
//   u64 rows, u64 cols, u64 active_columns, u64 effective_rank,
//   f64 regularization_used, f64 jitter_level, u64 lower_triangular,
//   rows*cols f64 factor (row-major).
inline constexpr std::uint64_t kFactorCacheVersion = 1;

void save_factor(const std::filesystem::path& path, const FactorizedCovariance& f,
                 const kernel::KernelParams& p, std::size_t n);

/// Throws DomainError when the file is missing, malformed or keyed by
/// different (H, n, T).
FactorizedCovariance load_factor(const std::filesystem::path& path, const kernel::KernelParams& p,
                                 std::size_t n);

}  // namespace sve::gaussian
