#include "sve/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "sve/errors.hpp"

namespace sve::kernel {

KernelParams KernelParams::make(double H, double T) {
  if (!(H > 0.0 && H <= 0.5)) throw DomainError("H must lie in (0, 1/2]");
  if (!(T > 0.0)) throw DomainError("horizon T must be positive");
  KernelParams p;
  p.H = H;
  p.T = T;
  p.gamma_h_half_ = std::tgamma(H + 0.5);
  p.gamma_h_three_half_ = std::tgamma(H + 1.5);
  p.G = p.gamma_h_half_ * p.gamma_h_half_;
  p.c_limit = 1.0 / (std::tgamma(2.0 * H + 2.0) * std::sin(std::numbers::pi * H));
  p.C_H = std::sqrt(p.c_limit);
  return p;
}

double eval_K(const KernelParams& p, double t) {
  if (!(t > 0.0)) throw DomainError("eval_K: t must be positive (kernel pole at the origin)");
  return std::pow(t, p.exponent()) / p.gamma_half();
}

double eval_K_derivative(const KernelParams& p, double t) {
  if (!(t > 0.0)) throw DomainError("eval_K_derivative: t must be positive");
  const double a = p.exponent();
  if (a == 0.0) return 0.0;
  return a * std::pow(t, a - 1.0) / p.gamma_half();
}

namespace {

void check_interval(const char* op, double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) {
    throw DomainError(std::string(op) + ": requires 0 <= a <= b");
  }
}

}  // namespace

double int_K(const KernelParams& p, double a, double b) {
  check_interval("int_K", a, b);
  if (a == b) return 0.0;
  const double e = p.H + 0.5;
  return (std::pow(b, e) - std::pow(a, e)) / p.gamma_three_half();
}

double int_K2(const KernelParams& p, double a, double b) {
  check_interval("int_K2", a, b);
  if (a == b) return 0.0;
  const double e = 2.0 * p.H;
  return (std::pow(b, e) - std::pow(a, e)) / (e * p.G);
}

double mu(const KernelParams& p, double r, double y) {
  if (!(r > 0.0)) throw DomainError("mu: r must be positive");
  if (!(y >= 0.0)) throw DomainError("mu: y must be nonnegative");
  const double a = p.exponent();
  if (a == 0.0 || y == 0.0) return 0.0;
  return std::pow(r, a) * std::expm1(a * std::log1p(y / r));
}

double mu_sq_tail(const KernelParams& p, double R) {
  // mu(r,1) ~ (H-1/2) r^{H-3/2} for large r.
  const double a = p.exponent();
  return a * a * std::pow(R, 2.0 * p.H - 2.0) / (2.0 - 2.0 * p.H);
}

namespace {

double mu_sq_unit_interval(const KernelParams& p, double upper, const QuadratureConfig& q) {
  auto f = [&](double r) {
    const double m = mu(p, r, 1.0);
    return m * m;
  };
  return integrate_left_singular(f, 0.0, upper, 2.0 * p.H - 1.0, q).value;
}

double mu_sq_log_range(const KernelParams& p, double lo, double hi, const QuadratureConfig& q) {
  auto f = [&](double y) {
    const double r = std::exp(y);
    const double m = mu(p, r, 1.0);
    return m * m * r;
  };
  return integrate(f, std::log(lo), std::log(hi), q).value;
}

}  // namespace

double mu_sq_integral(const KernelParams& p, double R, const QuadratureConfig& q) {
  if (!(R >= 0.0)) throw DomainError("mu_sq_integral: R must be nonnegative");
  if (p.exponent() == 0.0 || R == 0.0) return 0.0;
  if (R <= 1.0) return mu_sq_unit_interval(p, R, q);
  const double cut = q.tail_cutoff;
  double total = mu_sq_unit_interval(p, 1.0, q);
  total += mu_sq_log_range(p, 1.0, std::min(R, cut), q);
  if (R > cut) {
    total += std::isinf(R) ? mu_sq_tail(p, cut) : mu_sq_tail(p, cut) - mu_sq_tail(p, R);
  }
  return total;
}

double mishura_identity_residual(const KernelParams& p, const QuadratureConfig& q) {
  q.validate();
  const double integral = mu_sq_integral(p, std::numeric_limits<double>::infinity(), q);
  const double lhs = 2.0 * p.H * integral + 1.0;
  const double rhs = p.G / (std::tgamma(2.0 * p.H) * std::sin(std::numbers::pi * p.H));
  return lhs - rhs;
}

double unit_covariance_entry(const KernelParams& p, std::size_t i, std::size_t j,
                             const QuadratureConfig& q) {
  if (i == 0 || j == 0) throw DomainError("covariance_entry: step indices start at 1");
  const double a = p.exponent();
  if (i == j) {
    const double e = 2.0 * p.H;
    const double di = static_cast<double>(i);
    return (std::pow(di, e) - std::pow(di - 1.0, e)) / (e * p.G);
  }
  const auto [lo, hi] = std::minmax(i, j);
  if (a == 0.0) return 1.0;
  const double off_lo = static_cast<double>(lo - 1);
  const double off_hi = static_cast<double>(hi - 1);
  // u = 1 - s; the integrand is (off_lo + u)^a (off_hi + u)^a.
  if (lo == 1) {
    auto f = [&](double u) { return std::pow(u, a) * std::pow(off_hi + u, a); };
    return integrate_left_singular(f, 0.0, 1.0, a, q).value / p.G;
  }
  auto f = [&](double u) { return std::pow((off_lo + u) * (off_hi + u), a); };
  return integrate(f, 0.0, 1.0, q).value / p.G;
}

double covariance_entry(const KernelParams& p, std::size_t i, std::size_t j, double delta,
                        const QuadratureConfig& q) {
  if (!(delta > 0.0)) throw DomainError("covariance_entry: step must be positive");
  if (i == j && i > 0) {
    const double di = static_cast<double>(i);
    return int_K2(p, (di - 1.0) * delta, di * delta);
  }
  return std::pow(delta, 2.0 * p.H) * unit_covariance_entry(p, i, j, q);
}

}  // namespace sve::kernel
