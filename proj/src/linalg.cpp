#include "sve/linalg.hpp"

#include <cmath>

namespace sve::linalg {

double dot(const double* x, const double* y, std::size_t len) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    s0 += x[k] * y[k];
    s1 += x[k + 1] * y[k + 1];
    s2 += x[k + 2] * y[k + 2];
    s3 += x[k + 3] * y[k + 3];
  }
  for (; k < len; ++k) s0 += x[k] * y[k];
  return (s0 + s1) + (s2 + s3);
}

namespace {

template <bool Parallel>
CholeskyOutcome cholesky_impl(std::span<double> a, std::size_t n) {
  CholeskyOutcome out;
  out.pivots.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double* row_j = a.data() + j * n;
    const double pivot = row_j[j] - dot(row_j, row_j, j);
    out.pivots[j] = pivot;
    if (!(pivot > 0.0)) {
      out.failed_at = j;
      out.failed_pivot = pivot;
      return out;
    }
    const double diag = std::sqrt(pivot);
    row_j[j] = diag;
    const auto first = static_cast<long long>(j + 1);
    const auto last = static_cast<long long>(n);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static) if (n - j > 256)
      for (long long i = first; i < last; ++i) {
        double* row_i = a.data() + static_cast<std::size_t>(i) * n;
        row_i[j] = (row_i[j] - dot(row_i, row_j, j)) / diag;
      }
    } else {
      for (long long i = first; i < last; ++i) {
        double* row_i = a.data() + static_cast<std::size_t>(i) * n;
        row_i[j] = (row_i[j] - dot(row_i, row_j, j)) / diag;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) a[i * n + k] = 0.0;
  }
  out.ok = true;
  return out;
}

}  // namespace

CholeskyOutcome cholesky_serial(std::span<double> a, std::size_t n) {
  return cholesky_impl<false>(a, n);
}

CholeskyOutcome cholesky_omp(std::span<double> a, std::size_t n) {
  return cholesky_impl<true>(a, n);
}

}  // namespace sve::linalg
