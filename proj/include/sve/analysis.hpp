#pragma once

// Path functionals: quadratic variations of the normalized scheme error,
// the deterministic limit of their expectation, the Marchaud derivative,
// discrete Hoelder norms and the fractional-parts integral.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sve/kernel.hpp"
#include "sve/quadrature.hpp"
#include "sve/scheme.hpp"

namespace sve::analysis {

enum class QVRule {
  /// Plain trapezoid on the fine grid.
  Trapezoid,
  /// Product trapezoid: the integrand is written as x^gamma phi(x) in the
  /// in-cell fraction x, phi is interpolated linearly and x^gamma integrated
  /// exactly (gamma = 2H for the quadratic variation, H for the mixed one).
  PowerWeighted,
};

struct QVOptions {
  QVRule rule = QVRule::PowerWeighted;
};

struct QVReport {
  int d = 1;
  std::vector<double> t_grid;  ///< coarse grid times
  /// n^{2H} int (dX^{k1})(dX^{k2}) ds at each coarse time, d x d row-major.
  std::vector<std::vector<double>> qv;
  /// n^H int dX^k ds at each coarse time.
  std::vector<std::vector<double>> mixed;
  /// c_limit sum_l int sigma^{k1}_l sigma^{k2}_l (X_s) ds along the fine path.
  std::vector<std::vector<double>> predicted;

  double qv_at(std::size_t time, int k1, int k2) const {
    return qv[time][static_cast<std::size_t>(k1 * d + k2)];
  }
};

/// Quadrature weights for one coarse cell sampled at m + 1 equispaced points,
/// in units of the cell length.
std::vector<double> cell_weights(QVRule rule, std::size_t m, double gamma);

/// dX_s = X^_s - X^_{[ns]/n} is taken from hat_between_path on the fine grid
/// of the run, with the coarse values at both cell ends.
QVReport qv_functionals(const scheme::CoupledRun& run, const scheme::Model& model,
                        const kernel::KernelParams& p, const QVOptions& opt = {});

/// E of the quadratic variation for b = 0, sigma = 1 (d = m = 1), with grid
/// step T/n. For T = 1 it tends to c_limit t.
double deterministic_qv_limit(const kernel::KernelParams& p, std::size_t n, double t,
                              const QuadratureConfig& q = {});

/// Expectation of n^{2H} (X^_s - X^_{[ns]/n})^2 for b = 0, sigma = 1 at
/// s = (j + x) T / n; the integrand of deterministic_qv_limit.
double expected_qv_integrand(const kernel::KernelParams& p, std::size_t n, std::size_t j, double x,
                             const QuadratureConfig& q = {});

/// K(t) f(t) - int_0^t K'(t-s) (f(t) - f(s)) ds at t = index * h, for f
/// sampled on the uniform grid s_i = i h with f[0] = 0. f is replaced by its
/// piecewise-linear interpolant, against which K' integrates exactly cell
/// by cell.
double marchaud_derivative(std::span<const double> f, double h, const kernel::KernelParams& p,
                           std::size_t index);

struct HolderNorm {
  double value = 0.0;
  double sup = 0.0;
  double seminorm = 0.0;
  bool dyadic = false;  ///< true when only gaps of 2^k cells were scanned
};

struct HolderOptions {
  std::size_t full_scan_limit = 4096;  ///< cells; larger paths use dyadic gaps
  bool force_full = false;
  bool force_dyadic = false;
};

/// sup |f| + max_{s<t} |f(t) - f(s)| / (t - s)^lambda over grid pairs, with
/// the Euclidean norm for d > 1. `values` is row-major (points x d).
HolderNorm holder_norm(std::span<const double> values, int d, double h, double lambda,
                       const HolderOptions& opt = {});
HolderNorm holder_norm(const scheme::GridPath& path, double lambda, const HolderOptions& opt = {});

struct FracPartsResult {
  double value = 0.0;
  double limit = 0.0;
};

/// int_0^t k(s) g(ns - [ns]) ds integrated cell by cell, and its limit
/// int_0^1 g * int_0^t k. `g_exponent` > -1 declares g ~ r^{g_exponent}
/// near 0 so the cell quadrature can absorb the singularity (0 = regular).
FracPartsResult fractional_parts_integral(const std::function<double(double)>& k_fn,
                                          const std::function<double(double)>& g_fn,
                                          std::size_t n, double t, double g_exponent = 0.0,
                                          const QuadratureConfig& q = {});

}  // namespace sve::analysis
