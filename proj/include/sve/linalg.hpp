#pragma once

// Dense lower-triangular factorization of a symmetric matrix stored
// row-major. Both variants perform identical per-entry arithmetic, so their
// outputs agree bit for bit; the serial one is kept as the test reference.

#include <cstddef>
#include <span>
#include <vector>

namespace sve::linalg {

struct CholeskyOutcome {
  bool ok = false;
  std::size_t failed_at = 0;   ///< column of the first non-positive pivot
  double failed_pivot = 0.0;
  std::vector<double> pivots;  ///< squared diagonal of the factor
};

/// In place: on success the lower triangle of `a` (n x n, row-major) holds
/// the factor and the strict upper triangle is zeroed.
CholeskyOutcome cholesky_serial(std::span<double> a, std::size_t n);
CholeskyOutcome cholesky_omp(std::span<double> a, std::size_t n);

/// Four-accumulator dot product with a fixed summation order.
double dot(const double* x, const double* y, std::size_t len);

}  // namespace sve::linalg
