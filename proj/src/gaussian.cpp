#include "sve/gaussian.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "sve/errors.hpp"
#include "sve/linalg.hpp"

namespace sve::gaussian {

CovarianceTable::CovarianceTable(std::size_t n, double delta, std::vector<double> entries)
    : n_(n), delta_(delta), entries_(std::move(entries)) {
  if (entries_.size() != dim() * dim()) throw DomainError("CovarianceTable: entry count mismatch");
}

double CovarianceTable::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
  return t;
}

double CovarianceTable::frobenius_norm() const {
  double s = 0.0;
  for (double v : entries_) s += v * v;
  return std::sqrt(s);
}

double CovarianceTable::min_eigenvalue() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      entries_.data(), d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver failed", 0.0, 0.0);
  return es.eigenvalues()(0);
}

namespace {

void fill_row(const kernel::KernelParams& p, std::size_t n, double delta, double scale,
              const QuadratureConfig& q, std::size_t i, std::vector<double>& e) {
  const std::size_t dim = n + 1;
  const double di = static_cast<double>(i);
  if (i == 0) {
    e[0] = delta;
    return;
  }
  e[i * dim] = kernel::int_K(p, (di - 1.0) * delta, di * delta);
  e[i * dim + i] = kernel::covariance_entry(p, i, i, delta, q);
  for (std::size_t j = i + 1; j < dim; ++j) {
    e[i * dim + j] = scale * kernel::unit_covariance_entry(p, i, j, q);
  }
}

void symmetrize(std::size_t dim, std::vector<double>& e) {
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (j == 0) {
        e[j * dim + i] = e[i * dim + j];
      } else {
        e[i * dim + j] = e[j * dim + i];
      }
    }
  }
}

}  // namespace

CovarianceTable build_covariance(const kernel::KernelParams& p, std::size_t n,
                                 const QuadratureConfig& q) {
  if (n == 0) throw DomainError("build_covariance: n must be at least 1");
  const double delta = p.T / static_cast<double>(n);
  const double scale = std::pow(delta, 2.0 * p.H);
  const std::size_t dim = n + 1;
  std::vector<double> e(dim * dim, 0.0);
  const auto rows = static_cast<long long>(dim);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < rows; ++i) {
    fill_row(p, n, delta, scale, q, static_cast<std::size_t>(i), e);
  }
  symmetrize(dim, e);
  return {n, delta, std::move(e)};
}

CovarianceTable build_covariance_serial(const kernel::KernelParams& p, std::size_t n,
                                        const QuadratureConfig& q) {
  if (n == 0) throw DomainError("build_covariance: n must be at least 1");
  const double delta = p.T / static_cast<double>(n);
  const double scale = std::pow(delta, 2.0 * p.H);
  const std::size_t dim = n + 1;
  std::vector<double> e(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) fill_row(p, n, delta, scale, q, i, e);
  symmetrize(dim, e);
  return {n, delta, std::move(e)};
}

FactorizedCovariance::FactorizedCovariance(std::size_t rows, std::size_t cols,
                                           std::vector<double> factor)
    : rows_(rows), cols_(cols), factor_(std::move(factor)) {
  if (factor_.size() != rows_ * cols_) {
    throw DomainError("FactorizedCovariance: factor size mismatch");
  }
  active_columns = cols_;
  effective_rank = cols_;
}

FactorizedCovariance factorize(const CovarianceTable& table, const RegularizationPolicy& reg) {
  const std::size_t dim = table.dim();
  const double unit_jitter = table.trace() / static_cast<double>(dim);
  auto attempt = [&](double shift, std::vector<double>& work) {
    work.assign(table.entries().begin(), table.entries().end());
    for (std::size_t i = 0; i < dim; ++i) work[i * dim + i] += shift;
    return reg.parallel ? linalg::cholesky_omp(work, dim) : linalg::cholesky_serial(work, dim);
  };

  std::vector<double> work;
  double level = 0.0;
  double shift = 0.0;
  auto outcome = attempt(0.0, work);
  for (std::size_t k = 0; !outcome.ok && k < reg.jitter_levels.size(); ++k) {
    level = reg.jitter_levels[k];
    shift = level * unit_jitter;
    outcome = attempt(shift, work);
  }
  if (!outcome.ok) {
    std::ostringstream msg;
    msg << "factorize: non-positive pivot " << outcome.failed_pivot << " at column "
        << outcome.failed_at << " of " << dim << " with jitter " << shift;
    throw FactorizationError(msg.str(), outcome.failed_at, outcome.failed_pivot, shift);
  }

  FactorizedCovariance f(dim, dim, std::move(work));
  f.pivots = std::move(outcome.pivots);
  f.regularization_used = shift;
  f.jitter_level = level;
  const double max_pivot = *std::max_element(f.pivots.begin(), f.pivots.end());
  const double threshold = reg.rank_threshold * max_pivot;
  f.effective_rank = 0;
  f.active_columns = 0;
  // Pivots are residual variances of the shifted matrix; the shift itself
  // carries no signal, so rank is judged on what remains above it.
  for (std::size_t j = 0; j < dim; ++j) {
    if (f.pivots[j] - shift > threshold) {
      ++f.effective_rank;
      f.active_columns = j + 1;
    }
  }
  return f;
}

FactorizedCovariance low_rank_project(const CovarianceTable& table, std::size_t r) {
  const std::size_t dim = table.dim();
  if (r == 0 || r > dim) throw DomainError("low_rank_project: rank must lie in [1, n+1]");
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      table.entries().data(), d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("low_rank_project: eigensolver failed", 0.0, 0.0);
  }
  // Eigenvalues come back ascending; take the r largest.
  std::vector<double> factor(dim * r);
  for (std::size_t c = 0; c < r; ++c) {
    const auto idx = d - 1 - static_cast<Eigen::Index>(c);
    const double lambda = std::max(es.eigenvalues()(idx), 0.0);
    const double s = std::sqrt(lambda);
    for (std::size_t i = 0; i < dim; ++i) {
      factor[i * r + c] = s * es.eigenvectors()(static_cast<Eigen::Index>(i), idx);
    }
  }
  FactorizedCovariance f(dim, r, std::move(factor));
  f.lower_triangular = false;
  f.effective_rank = 0;
  for (std::size_t c = 0; c < r; ++c) {
    if (es.eigenvalues()(d - 1 - static_cast<Eigen::Index>(c)) > 0.0) ++f.effective_rank;
  }
  f.relative_error = reconstruction_error(f, table) / table.frobenius_norm();
  return f;
}

double reconstruction_error(const FactorizedCovariance& f, const CovarianceTable& table) {
  const std::size_t dim = table.dim();
  if (f.rows() != dim) throw DomainError("reconstruction_error: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = linalg::dot(f.row(i).data(), f.row(j).data(), f.cols());
      const double diff = v - table(i, j);
      s += diff * diff;
    }
  }
  return std::sqrt(s);
}

std::size_t normals_per_step(const FactorizedCovariance& f) { return f.active_columns; }

void sample_step_into(const FactorizedCovariance& f, std::size_t remaining, const StreamKey& key,
                      std::span<double> out, std::span<double> z) {
  const std::size_t len = remaining + 1;
  if (len > f.rows()) throw DomainError("sample_step: remaining exceeds the factor dimension");
  if (out.size() < len) throw DomainError("sample_step: output buffer too small");
  const std::size_t active = f.active_columns;
  if (z.size() < active) throw DomainError("sample_step: normal buffer too small");
  rng::fill_normals(key, z.first(active));
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t width = f.lower_triangular ? std::min(i + 1, active) : active;
    out[i] = linalg::dot(f.row(i).data(), z.data(), width);
  }
}

std::vector<double> sample_step(const FactorizedCovariance& f, std::size_t remaining,
                                const StreamKey& key) {
  std::vector<double> out(remaining + 1);
  std::vector<double> z(normals_per_step(f));
  sample_step_into(f, remaining, key, out, z);
  return out;
}

}  // namespace sve::gaussian
