#pragma once

// The fractional kernel K(t) = t^{H-1/2} / Gamma(H+1/2), its integrals, the
// step covariance entries and the constants of the limit equation.

#include <cstddef>

#include "sve/quadrature.hpp"

namespace sve::kernel {

struct KernelParams {
  double H = 0.5;
  double T = 1.0;
  double G = 1.0;        ///< Gamma(H+1/2)^2
  double c_limit = 0.5;  ///< 1 / (Gamma(2H+2) sin(pi H))
  double C_H = 0.0;      ///< sqrt(c_limit), coefficient of the independent noise

  /// Validates 0 < H <= 1/2, T > 0 and fills the derived constants.
  static KernelParams make(double H, double T = 1.0);

  double exponent() const noexcept { return H - 0.5; }
  double gamma_half() const noexcept { return gamma_h_half_; }
  double gamma_three_half() const noexcept { return gamma_h_three_half_; }

 private:
  double gamma_h_half_ = 1.0;
  double gamma_h_three_half_ = 1.0;
};

double eval_K(const KernelParams& p, double t);

/// K'(t) = (H-1/2) t^{H-3/2} / Gamma(H+1/2); zero for H = 1/2.
double eval_K_derivative(const KernelParams& p, double t);

/// Closed form of the integral of K over [a, b].
double int_K(const KernelParams& p, double a, double b);

/// Closed form of the integral of K^2 over [a, b].
double int_K2(const KernelParams& p, double a, double b);

/// mu(r, y) = (r+y)^{H-1/2} - r^{H-1/2}, evaluated without cancellation.
double mu(const KernelParams& p, double r, double y);

/// Integral of mu(r,1)^2 over [0, R]. R = +inf uses the cutoff of `q` and
/// the analytic power-law tail beyond it.
double mu_sq_integral(const KernelParams& p, double R, const QuadratureConfig& q = {});

/// Analytic estimate of the integral of mu(r,1)^2 over [R, inf).
double mu_sq_tail(const KernelParams& p, double R);

/// LHS - RHS of 2H * int_0^inf mu(r,1)^2 dr + 1 = G / (Gamma(2H) sin(pi H)).
double mishura_identity_residual(const KernelParams& p, const QuadratureConfig& q = {});

/// Sigma_ij for unit step: int_0^1 K(i - s) K(j - s) ds. Symmetric by
/// construction (arguments are ordered before evaluation).
double unit_covariance_entry(const KernelParams& p, std::size_t i, std::size_t j,
                             const QuadratureConfig& q = {});

/// Sigma_ij for step `delta`: int_0^delta K(i delta - s) K(j delta - s) ds.
double covariance_entry(const KernelParams& p, std::size_t i, std::size_t j, double delta,
                        const QuadratureConfig& q = {});

}  // namespace sve::kernel
