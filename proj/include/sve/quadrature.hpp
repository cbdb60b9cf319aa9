#pragma once

// Globally adaptive 21-point Gauss-Kronrod quadrature (QUADPACK qag
// strategy) plus power-law endpoint transforms for the weakly singular
// integrands that appear around the fractional kernel.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "sve/errors.hpp"

namespace sve {

struct QuadratureConfig {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  std::size_t max_subdivisions = 4000;
  /// Cutoff R for improper integrals on (0, inf); the remainder is handled
  /// analytically by the caller.
  double tail_cutoff = 1e6;

  void validate() const;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool at_roundoff;
};

template <class F>
Segment gk21(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double dhlgth = std::abs(hlgth);

  std::array<double, 10> fv1{}, fv2{};
  const double fc = f(centr);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = hlgth * kXgk[jtw];
    const double f1 = f(centr - absc);
    const double f2 = f(centr + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * kXgk[jtwm1];
    const double f1 = f(centr - absc);
    const double f2 = f(centr + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * hlgth;
  resabs *= dhlgth;
  resasc *= dhlgth;
  double abserr = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) {
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  }
  const double floor = 50.0 * eps * resabs;
  bool at_roundoff = false;
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps) && abserr <= floor) {
    abserr = floor;
    at_roundoff = true;
  }
  return {a, b, result, abserr, at_roundoff};
}

}  // namespace detail

/// Adaptive quadrature of f over [a, b]. Throws NumericalFailure (carrying
/// the achieved estimate) when max_subdivisions is exhausted.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
  if (a == b) return {};
  std::vector<detail::Segment> segs;
  segs.reserve(64);
  segs.push_back(detail::gk21(f, a, b));
  auto total = [&] {
    double v = 0.0, e = 0.0;
    for (const auto& s : segs) {
      v += s.value;
      e += s.error;
    }
    return std::pair{v, e};
  };
  for (;;) {
    auto [value, error] = total();
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
    if (error <= tol) return {value, error, segs.size()};

    auto worst = std::max_element(segs.begin(), segs.end(), [](const auto& l, const auto& r) {
      if (l.at_roundoff != r.at_roundoff) return l.at_roundoff;  // prefer splittable
      return l.error < r.error;
    });
    if (worst->at_roundoff) return {value, error, segs.size()};
    if (segs.size() >= cfg.max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << value
          << ", error " << error << " after " << segs.size() << " intervals";
      throw NumericalFailure(msg.str(), value, error);
    }
    const double mid = 0.5 * (worst->a + worst->b);
    const double lo = worst->a, hi = worst->b;
    if (!(mid > lo && mid < hi)) return {value, error, segs.size()};
    *worst = detail::gk21(f, lo, mid);
    segs.push_back(detail::gk21(f, mid, hi));
  }
}

/// Integral over [a, b] of an integrand behaving like (x - a)^exponent near
/// the left endpoint, exponent > -1. Uses x = a + (b - a) w^{1/(exponent+1)},
/// which absorbs the singularity into the Jacobian. `f` receives x itself, so
/// for a != 0 points closer to a than ulp(a) collapse onto a; pass a = 0
/// (shifting the integrand) when the singularity is strong.
template <class F>
QuadResult integrate_left_singular(F&& f, double a, double b, double exponent,
                                   const QuadratureConfig& cfg = {}) {
  if (!(exponent > -1.0)) throw DomainError("integrate_left_singular: exponent must exceed -1");
  if (a == b) return {};
  const double len = b - a;
  const double p = 1.0 / (exponent + 1.0);
  auto g = [&](double w) {
    const double wp = std::pow(w, p);
    return f(a + len * wp) * len * p * wp / w;
  };
  return integrate(g, 0.0, 1.0, cfg);
}

/// Type-erased entry point for callers holding a std::function.
QuadResult integrate_fn(const std::function<double(double)>& f, double a, double b,
                        const QuadratureConfig& cfg = {});

}  // namespace sve
