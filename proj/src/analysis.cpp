#include "sve/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "sve/errors.hpp"

namespace sve::analysis {

std::vector<double> cell_weights(QVRule rule, std::size_t m, double gamma) {
  if (m == 0) throw DomainError("cell_weights: need at least one sub-interval");
  const double h = 1.0 / static_cast<double>(m);
  std::vector<double> w(m + 1, 0.0);
  if (rule == QVRule::Trapezoid) {
    for (std::size_t i = 0; i <= m; ++i) w[i] = (i == 0 || i == m) ? 0.5 * h : h;
    return w;
  }
  if (!(gamma > 0.0)) throw DomainError("cell_weights: power weight needs gamma > 0");
  auto x = [&](std::size_t i) { return static_cast<double>(i) * h; };
  auto xg = [&](std::size_t i) { return std::pow(x(i), gamma); };
  // phi_i = y_i / x_i^gamma, constant on [0, x_1], linear afterwards.
  w[1] += std::pow(x(1), gamma + 1.0) / (gamma + 1.0) / xg(1);
  for (std::size_t i = 1; i < m; ++i) {
    const double a = (std::pow(x(i + 1), gamma + 1.0) - std::pow(x(i), gamma + 1.0)) / (gamma + 1.0);
    const double b = (std::pow(x(i + 1), gamma + 2.0) - std::pow(x(i), gamma + 2.0)) / (gamma + 2.0);
    w[i] += (x(i + 1) * a - b) / h / xg(i);
    w[i + 1] += (b - x(i) * a) / h / xg(i + 1);
  }
  return w;
}

QVReport qv_functionals(const scheme::CoupledRun& run, const scheme::Model& model,
                        const kernel::KernelParams& p, const QVOptions& opt) {
  const std::size_t n = run.n, m = run.m_ratio, N = n * m;
  if (run.fine_draws.steps() != N || run.fine.size() != N + 1 || run.coarse.size() != n + 1) {
    throw DomainError("qv_functionals: the coupled run does not carry its fine-grid data");
  }
  const int d = model.d;
  const auto du = static_cast<std::size_t>(d);
  const scheme::GridPath between = scheme::hat_between_path(model, p, run);
  const double cell = p.T / static_cast<double>(n);
  const double nH = std::pow(static_cast<double>(n), p.H);
  const auto wq = cell_weights(opt.rule, m, 2.0 * p.H);
  const auto wm = cell_weights(opt.rule, m, p.H);

  QVReport rep;
  rep.d = d;
  rep.t_grid = run.coarse.times;
  std::vector<double> qv(du * du, 0.0), mixed(du, 0.0), pred(du * du, 0.0);
  rep.qv.push_back(qv);
  rep.mixed.push_back(mixed);
  rep.predicted.push_back(pred);

  std::vector<double> dx((m + 1) * du);
  const double fine_h = p.T / static_cast<double>(N);
  scheme::Mat s_prev = model.sigma(run.fine.state(0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= m; ++i) {
      for (std::size_t a = 0; a < du; ++a) {
        const int ai = static_cast<int>(a);
        double v = 0.0;
        if (i == m) {
          v = run.coarse(k + 1, ai) - run.coarse(k, ai);
        } else if (i > 0) {
          v = between(k * m + i, ai) - run.coarse(k, ai);
        }
        dx[i * du + a] = v;
      }
    }
    for (std::size_t a = 0; a < du; ++a) {
      double sm = 0.0;
      for (std::size_t i = 0; i <= m; ++i) sm += wm[i] * dx[i * du + a];
      mixed[a] += nH * cell * sm;
      for (std::size_t b = a; b < du; ++b) {
        double sq = 0.0;
        for (std::size_t i = 0; i <= m; ++i) sq += wq[i] * dx[i * du + a] * dx[i * du + b];
        qv[a * du + b] += nH * nH * cell * sq;
        qv[b * du + a] = qv[a * du + b];
      }
    }
    // Predicted limit, trapezoid along the fine reference path.
    for (std::size_t i = 1; i <= m; ++i) {
      const scheme::Mat s_next = model.sigma(run.fine.state(k * m + i));
      const scheme::Mat acc = s_prev * s_prev.transpose() + s_next * s_next.transpose();
      for (std::size_t a = 0; a < du; ++a) {
        for (std::size_t b = 0; b < du; ++b) {
          pred[a * du + b] += p.c_limit * 0.5 * fine_h *
                              acc(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
      }
      s_prev = s_next;
    }
    rep.qv.push_back(qv);
    rep.mixed.push_back(mixed);
    rep.predicted.push_back(pred);
  }
  return rep;
}

namespace {

// Memory term x^{2H} M(j / x) of the expected integrand, M(R) = int_0^R mu(r,1)^2.
double memory_term(const kernel::KernelParams& p, double j, double x, const QuadratureConfig& q) {
  if (x <= 0.0 || j == 0.0) return 0.0;
  return std::pow(x, 2.0 * p.H) * kernel::mu_sq_integral(p, j / x, q);
}

}  // namespace

double expected_qv_integrand(const kernel::KernelParams& p, std::size_t n, std::size_t j, double x,
                             const QuadratureConfig& q) {
  if (n == 0) throw DomainError("expected_qv_integrand: n must be at least 1");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("expected_qv_integrand: x must lie in [0, 1]");
  const double scale = std::pow(p.T, 2.0 * p.H) / p.G;
  const double e = 2.0 * p.H;
  return scale * (memory_term(p, static_cast<double>(j), x, q) + std::pow(x, e) / e);
}

double deterministic_qv_limit(const kernel::KernelParams& p, std::size_t n, double t,
                              const QuadratureConfig& q) {
  if (n == 0) throw DomainError("deterministic_qv_limit: n must be at least 1");
  if (!(t >= 0.0 && t <= p.T)) throw DomainError("deterministic_qv_limit: t must lie in [0, T]");
  const double delta = p.T / static_cast<double>(n);
  const double steps = t / delta;
  auto full = static_cast<std::size_t>(std::floor(steps));
  double frac = steps - static_cast<double>(full);
  if (frac < 1e-12) frac = 0.0;
  if (1.0 - frac < 1e-12) {
    ++full;
    frac = 0.0;
  }
  const double e = 2.0 * p.H;
  double cells = static_cast<double>(full) / (e * (e + 1.0)) + std::pow(frac, e + 1.0) / (e * (e + 1.0));

  if (p.exponent() != 0.0 && (full > 1 || (full == 1 && frac > 0.0))) {
    // Swapping the order of integration,
    //   int_0^1 x^{2H} M(j/x) dx = (M(j) + j^{2H+1} S(j)) / (2H+1),
    // with M(j) = int_0^j mu(r,1)^2 dr and S(j) = int_j^inf mu(r,1)^2 r^{-2H-1} dr,
    // both assembled from unit-interval integrals.
    const std::size_t last = frac > 0.0 ? full : full - 1;  // largest cell index j used
    auto mu2 = [&](double r) {
      const double v = kernel::mu(p, r, 1.0);
      return v * v;
    };
    auto weighted = [&](double r) { return mu2(r) * std::pow(r, -e - 1.0); };
    std::vector<double> M(last + 1, 0.0), S(last + 2, 0.0);
    M[1] = kernel::mu_sq_integral(p, 1.0, q);
    for (std::size_t j = 2; j <= last; ++j) {
      M[j] = M[j - 1] + integrate(mu2, static_cast<double>(j - 1), static_cast<double>(j), q).value;
    }
    {
      // S(last + 1) in the log variable up to the cutoff, then the power tail
      // a^2 r^{-4} integrated analytically.
      const double lo = std::log(static_cast<double>(last + 1));
      const double hi = std::log(q.tail_cutoff);
      auto g = [&](double u) {
        const double r = std::exp(u);
        return weighted(r) * r;
      };
      double tail = hi > lo ? integrate(g, lo, hi, q).value : 0.0;
      const double a = p.exponent();
      const double R = std::max(q.tail_cutoff, static_cast<double>(last + 1));
      tail += a * a / (3.0 * R * R * R);
      S[last + 1] = tail;
    }
    for (std::size_t j = last; j >= 1; --j) {
      S[j] = S[j + 1] + integrate(weighted, static_cast<double>(j), static_cast<double>(j + 1), q).value;
    }
    double memory = 0.0;
    for (std::size_t j = 1; j < full; ++j) {
      memory += (M[j] + std::pow(static_cast<double>(j), e + 1.0) * S[j]) / (e + 1.0);
    }
    if (frac > 0.0) {
      // Partial cell: min(frac, j/r)^{2H+1} splits at r = j / frac.
      const double j = static_cast<double>(full);
      const double split = j / frac;
      const double m_split = kernel::mu_sq_integral(p, split, q);
      const auto k = static_cast<std::size_t>(std::floor(split));
      double s_split = S[std::min(k + 1, last + 1)];
      if (k + 1 <= last + 1) {
        s_split += integrate(weighted, split, static_cast<double>(k + 1), q).value;
      } else {
        const double lo = std::log(split), hi = std::log(q.tail_cutoff);
        auto g = [&](double u) {
          const double r = std::exp(u);
          return weighted(r) * r;
        };
        s_split = (hi > lo ? integrate(g, lo, hi, q).value : 0.0) +
                  p.exponent() * p.exponent() / (3.0 * std::pow(std::max(q.tail_cutoff, split), 3.0));
      }
      memory += (std::pow(frac, e + 1.0) * m_split + std::pow(j, e + 1.0) * s_split) / (e + 1.0);
    }
    cells += memory;
  }
  return std::pow(p.T, e) * delta / p.G * cells;
}

double marchaud_derivative(std::span<const double> f, double h, const kernel::KernelParams& p,
                           std::size_t index) {
  if (f.empty() || index >= f.size()) throw DomainError("marchaud_derivative: time is not on the grid");
  if (!(h > 0.0)) throw DomainError("marchaud_derivative: grid step must be positive");
  if (f[0] != 0.0) throw DomainError("marchaud_derivative: f(0) must be 0");
  if (index == 0) return 0.0;
  if (p.exponent() == 0.0) return f[index];
  const std::size_t P = index;
  const double t = static_cast<double>(P) * h;
  const double inv_gamma = 1.0 / p.gamma_half();
  double integral = 0.0;
  for (std::size_t c = 1; c < P; ++c) {
    const double u_lo = static_cast<double>(P - c) * h;
    const double u_hi = u_lo + h;
    const double w0 = kernel::mu(p, u_lo, h) * inv_gamma;  // K(u_hi) - K(u_lo)
    const double w1 = kernel::int_K(p, u_lo, u_hi) - h * kernel::eval_K(p, u_lo);
    integral += (f[P] - f[c - 1]) * w0 - (f[c] - f[c - 1]) / h * w1;
  }
  integral += (f[P] - f[P - 1]) / h * (h * kernel::eval_K(p, h) - kernel::int_K(p, 0.0, h));
  return kernel::eval_K(p, t) * f[P] - integral;
}

HolderNorm holder_norm(std::span<const double> values, int d, double h, double lambda,
                       const HolderOptions& opt) {
  if (d < 1 || values.size() % static_cast<std::size_t>(d) != 0) {
    throw DomainError("holder_norm: values are not a whole number of states");
  }
  const std::size_t points = values.size() / static_cast<std::size_t>(d);
  if (points < 2) throw DomainError("holder_norm: need at least 2 grid points");
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("holder_norm: lambda must lie in (0, 1)");
  const auto du = static_cast<std::size_t>(d);
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = 0; i < du; ++i) {
      const double diff = values[a * du + i] - values[b * du + i];
      s += diff * diff;
    }
    return std::sqrt(s);
  };
  auto mag = [&](std::size_t a) {
    double s = 0.0;
    for (std::size_t i = 0; i < du; ++i) s += values[a * du + i] * values[a * du + i];
    return std::sqrt(s);
  };

  HolderNorm out;
  for (std::size_t a = 0; a < points; ++a) out.sup = std::max(out.sup, mag(a));
  const std::size_t cells = points - 1;
  out.dyadic = opt.force_dyadic || (!opt.force_full && cells > opt.full_scan_limit);
  auto scan_gap = [&](std::size_t gap) {
    const double denom = std::pow(static_cast<double>(gap) * h, lambda);
    double best = 0.0;
    for (std::size_t a = 0; a + gap < points; ++a) best = std::max(best, dist(a + gap, a));
    out.seminorm = std::max(out.seminorm, best / denom);
  };
  if (out.dyadic) {
    for (std::size_t gap = 1; gap <= cells; gap *= 2) scan_gap(gap);
    if ((cells & (cells - 1)) != 0) scan_gap(cells);
  } else {
    for (std::size_t gap = 1; gap <= cells; ++gap) scan_gap(gap);
  }
  out.value = out.sup + out.seminorm;
  return out;
}

HolderNorm holder_norm(const scheme::GridPath& path, double lambda, const HolderOptions& opt) {
  if (path.size() < 2) throw DomainError("holder_norm: need at least 2 grid points");
  const double h = path.times[1] - path.times[0];
  return holder_norm(path.values, path.d, h, lambda, opt);
}

FracPartsResult fractional_parts_integral(const std::function<double(double)>& k_fn,
                                          const std::function<double(double)>& g_fn,
                                          std::size_t n, double t, double g_exponent,
                                          const QuadratureConfig& q) {
  if (n == 0) throw DomainError("fractional_parts_integral: n must be at least 1");
  if (!(t >= 0.0)) throw DomainError("fractional_parts_integral: t must be nonnegative");
  const double dn = static_cast<double>(n);
  auto integrate_g = [&](const std::function<double(double)>& f, double upper) {
    if (upper <= 0.0) return 0.0;
    if (g_exponent == 0.0) return integrate(f, 0.0, upper, q).value;
    return integrate_left_singular(f, 0.0, upper, g_exponent, q).value;
  };
  const double scaled = dn * t;
  const auto full = static_cast<std::size_t>(std::floor(scaled));
  const double frac = scaled - static_cast<double>(full);

  FracPartsResult r;
  for (std::size_t j = 0; j <= full; ++j) {
    const double upper = j < full ? 1.0 : frac;
    const double base = static_cast<double>(j);
    std::function<double(double)> f = [&](double x) { return k_fn((base + x) / dn) * g_fn(x); };
    r.value += integrate_g(f, upper) / dn;
  }
  const double g_int = integrate_g(g_fn, 1.0);
  const double k_int = t > 0.0 ? integrate(k_fn, 0.0, t, q).value : 0.0;
  r.limit = g_int * k_int;
  return r;
}

}  // namespace sve::analysis
