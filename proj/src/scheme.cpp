#include "sve/scheme.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "sve/csv.hpp"
#include "sve/errors.hpp"

namespace sve::scheme {

namespace {

// int_K over [(i-1) delta, i delta] for i = 1..n, stored at i-1.
std::vector<double> drift_weights(const kernel::KernelParams& p, std::size_t n, double delta) {
  std::vector<double> w(n);
  for (std::size_t i = 1; i <= n; ++i) {
    w[i - 1] = kernel::int_K(p, static_cast<double>(i - 1) * delta, static_cast<double>(i) * delta);
  }
  return w;
}

GridPath make_grid(int d, std::size_t n, double T) {
  GridPath path;
  path.d = d;
  path.times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    path.times[k] = T * static_cast<double>(k) / static_cast<double>(n);
  }
  path.times[n] = T;
  path.values.assign((n + 1) * static_cast<std::size_t>(d), 0.0);
  return path;
}

void guard(const Vec& x, double limit, std::size_t step, const char* who) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > limit) {
      std::ostringstream msg;
      msg << who << ": state left the finite range at step " << step << " (component " << i
          << " = " << x(i) << ")";
      throw DivergenceError(msg.str(), step);
    }
  }
}

void check_model_shape(const Model& model) {
  if (model.d < 1 || model.m < 1) throw DomainError("model dimensions must be positive");
  if (model.X0.size() != model.d) throw DomainError("model X0 has the wrong dimension");
}

// acc[k] += c * g[k - q + 1] for k = q..n, the push-forward of one step.
inline void axpy_tail(std::vector<double>& acc, std::size_t q, std::size_t n, double c,
                      const double* g) {
  if (c == 0.0) return;
  double* a = acc.data() + q;
  const std::size_t len = n - q + 1;
  for (std::size_t i = 0; i < len; ++i) a[i] += c * g[i];
}

Vec state_from(const std::vector<std::vector<double>>& acc, const Vec& x0, std::size_t k) {
  Vec x = x0;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += acc[static_cast<std::size_t>(i)][k];
  return x;
}

}  // namespace

Vec GridPath::state(std::size_t k) const {
  Vec x(d);
  for (int i = 0; i < d; ++i) x(i) = (*this)(k, i);
  return x;
}

void write_csv(std::ostream& os, const GridPath& path) {
  std::vector<std::string> header{"t"};
  for (int i = 1; i <= path.d; ++i) header.push_back("x" + std::to_string(i));
  csv::write_header(os, header);
  std::vector<double> row(static_cast<std::size_t>(path.d) + 1);
  for (std::size_t k = 0; k < path.size(); ++k) {
    row[0] = path.times[k];
    for (int i = 0; i < path.d; ++i) row[static_cast<std::size_t>(i) + 1] = path(k, i);
    csv::write_row(os, row);
  }
}

JacobianCheck check_model(const Model& model, double radius, int points, double tol) {
  check_model_shape(model);
  const int d = model.d, m = model.m;
  const double h = 1e-6;
  JacobianCheck out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  const auto probe = [&](const Vec& x) {
    const Mat gb = model.grad_b(x);
    const Tensor3 gs = model.grad_sigma(x);
    for (int k = 0; k < d; ++k) {
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      const Vec db = (model.b(xp) - model.b(xm)) / (2.0 * h);
      const Mat ds = (model.sigma(xp) - model.sigma(xm)) / (2.0 * h);
      for (int i = 0; i < d; ++i) {
        out.max_fd_error = std::max(out.max_fd_error, std::abs(db(i) - gb(i, k)));
        out.max_derivative = std::max(out.max_derivative, std::abs(gb(i, k)));
        for (int j = 0; j < m; ++j) {
          out.max_fd_error = std::max(out.max_fd_error, std::abs(ds(i, j) - gs(i, j, k)));
          out.max_derivative = std::max(out.max_derivative, std::abs(gs(i, j, k)));
        }
      }
    }
  };
  // Tensor grid of `points` values per axis centred on X0.
  for (;;) {
    Vec x = model.X0;
    for (int k = 0; k < d; ++k) {
      const double frac = points > 1 ? static_cast<double>(idx[static_cast<std::size_t>(k)]) /
                                           static_cast<double>(points - 1)
                                     : 0.5;
      x(k) += radius * (2.0 * frac - 1.0);
    }
    probe(x);
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == points) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == d) break;
  }
  out.ok = out.max_fd_error < tol && out.max_derivative <= model.derivative_bound * (1.0 + 1e-12);
  return out;
}

StepDraws::StepDraws(std::size_t n, int components)
    : n_(n), components_(components), per_component_(0) {
  // Step k holds n - k + 2 values.
  for (std::size_t k = 1; k <= n; ++k) per_component_ += n - k + 2;
  data_.assign(per_component_ * static_cast<std::size_t>(components), 0.0);
}

std::size_t StepDraws::offset(std::size_t k, int c) const {
  if (k < 1 || k > n_ || c < 0 || c >= components_) throw DomainError("StepDraws: index out of range");
  // Sum of (n - q + 2) for q < k.
  const std::size_t before = (k - 1) * (n_ + 2) - (k - 1) * k / 2;
  return static_cast<std::size_t>(c) * per_component_ + before;
}

std::span<const double> StepDraws::at(std::size_t k, int c) const {
  return std::span<const double>(data_).subspan(offset(k, c), n_ - k + 2);
}

std::span<double> StepDraws::at(std::size_t k, int c) {
  return std::span<double>(data_).subspan(offset(k, c), n_ - k + 2);
}

StepDraws draw_steps(const gaussian::FactorizedCovariance& factor, std::size_t n, int components,
                     const StreamKey& key, std::uint64_t component_base) {
  if (factor.rows() != n + 1) throw DomainError("draw_steps: factor dimension does not match n + 1");
  StepDraws draws(n, components);
  std::vector<double> z(gaussian::normals_per_step(factor));
  for (int c = 0; c < components; ++c) {
    const StreamKey kc = key.with_component(component_base + static_cast<std::uint64_t>(c));
    for (std::size_t k = 1; k <= n; ++k) {
      gaussian::sample_step_into(factor, n - k + 1, kc.with_step(k), draws.at(k, c), z);
    }
  }
  return draws;
}

GridPath simulate_hat_X(const Model& model, const kernel::KernelParams& p, std::size_t n,
                        const StepDraws& draws, const SchemeOptions& opt) {
  check_model_shape(model);
  if (n == 0) throw DomainError("simulate_hat_X: n must be at least 1");
  if (draws.steps() != n || draws.components() != model.m) {
    throw DomainError("simulate_hat_X: draws do not match the grid or the driving dimension");
  }
  const double delta = p.T / static_cast<double>(n);
  const auto w = drift_weights(p, n, delta);
  const auto d = static_cast<std::size_t>(model.d);
  std::vector<std::vector<double>> acc(d, std::vector<double>(n + 1, 0.0));
  GridPath path = make_grid(model.d, n, p.T);

  for (std::size_t q = 1; q <= n; ++q) {
    const Vec x = state_from(acc, model.X0, q - 1);
    guard(x, opt.divergence_guard, q - 1, "simulate_hat_X");
    for (std::size_t i = 0; i < d; ++i) path(q - 1, static_cast<int>(i)) = x(static_cast<Eigen::Index>(i));
    const Vec bx = model.b(x);
    const Mat sx = model.sigma(x);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      axpy_tail(acc[i], q, n, bx(ii), w.data());
      for (int c = 0; c < model.m; ++c) {
        axpy_tail(acc[i], q, n, sx(ii, c), draws.at(q, c).data() + 1);
      }
    }
  }
  const Vec xn = state_from(acc, model.X0, n);
  guard(xn, opt.divergence_guard, n, "simulate_hat_X");
  for (std::size_t i = 0; i < d; ++i) path(n, static_cast<int>(i)) = xn(static_cast<Eigen::Index>(i));
  return path;
}

std::vector<double> plain_increments(const StepDraws& draws) {
  std::vector<double> out(draws.steps() * static_cast<std::size_t>(draws.components()));
  for (std::size_t k = 1; k <= draws.steps(); ++k) {
    for (int c = 0; c < draws.components(); ++c) {
      out[(k - 1) * static_cast<std::size_t>(draws.components()) + static_cast<std::size_t>(c)] =
          draws.plain(k, c);
    }
  }
  return out;
}

GridPath simulate_euler(const Model& model, const kernel::KernelParams& p, std::size_t n,
                        std::span<const double> dW, const SchemeOptions& opt) {
  check_model_shape(model);
  if (n == 0) throw DomainError("simulate_euler: n must be at least 1");
  const auto m = static_cast<std::size_t>(model.m);
  if (dW.size() != n * m) throw DomainError("simulate_euler: expected n * m plain increments");
  const double delta = p.T / static_cast<double>(n);
  // Left-point kernel K((i) delta) for the contribution of step q to t_{q+i-1}.
  std::vector<double> kw(n);
  for (std::size_t i = 1; i <= n; ++i) kw[i - 1] = kernel::eval_K(p, static_cast<double>(i) * delta);
  const auto d = static_cast<std::size_t>(model.d);
  std::vector<std::vector<double>> acc(d, std::vector<double>(n + 1, 0.0));
  GridPath path = make_grid(model.d, n, p.T);

  for (std::size_t q = 1; q <= n; ++q) {
    const Vec x = state_from(acc, model.X0, q - 1);
    guard(x, opt.divergence_guard, q - 1, "simulate_euler");
    for (std::size_t i = 0; i < d; ++i) path(q - 1, static_cast<int>(i)) = x(static_cast<Eigen::Index>(i));
    const Vec bx = model.b(x);
    const Mat sx = model.sigma(x);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double incr = bx(ii) * delta;
      for (std::size_t c = 0; c < m; ++c) {
        incr += sx(ii, static_cast<Eigen::Index>(c)) * dW[(q - 1) * m + c];
      }
      axpy_tail(acc[i], q, n, incr, kw.data());
    }
  }
  const Vec xn = state_from(acc, model.X0, n);
  guard(xn, opt.divergence_guard, n, "simulate_euler");
  for (std::size_t i = 0; i < d; ++i) path(n, static_cast<int>(i)) = xn(static_cast<Eigen::Index>(i));
  return path;
}

StepDraws aggregate_fine_to_coarse(const StepDraws& fine, std::size_t n, std::size_t m_ratio) {
  if (n == 0 || m_ratio == 0 || fine.steps() != n * m_ratio) {
    throw DomainError("aggregate_fine_to_coarse: fine draws do not have n * m_ratio steps");
  }
  StepDraws coarse(n, fine.components());
  for (int c = 0; c < fine.components(); ++c) {
    for (std::size_t k = 1; k <= n; ++k) {
      auto out = coarse.at(k, c);
      for (std::size_t q = (k - 1) * m_ratio + 1; q <= k * m_ratio; ++q) {
        const auto g = fine.at(q, c);
        out[0] += g[0];
        for (std::size_t i = 1; i <= n - k + 1; ++i) out[i] += g[(k + i - 1) * m_ratio - q + 1];
      }
    }
  }
  return coarse;
}

CoupledSimulator::CoupledSimulator(Model model, kernel::KernelParams p, std::size_t n,
                                   std::size_t m_ratio,
                                   const gaussian::FactorizedCovariance& fine_factor,
                                   SchemeOptions opt)
    : model_(std::move(model)), p_(p), n_(n), m_ratio_(m_ratio), factor_(fine_factor), opt_(opt) {
  if (n_ == 0 || m_ratio_ == 0) throw DomainError("CoupledSimulator: n and m_ratio must be positive");
  if (factor_.rows() != n_ * m_ratio_ + 1) {
    throw DomainError("CoupledSimulator: factor dimension does not match n * m_ratio + 1");
  }
}

CoupledRun CoupledSimulator::run(const StreamKey& key) const {
  CoupledRun r;
  r.n = n_;
  r.m_ratio = m_ratio_;
  const std::size_t N = n_ * m_ratio_;
  r.fine_draws = draw_steps(factor_, N, model_.m, key);
  r.fine = simulate_hat_X(model_, p_, N, r.fine_draws, opt_);
  r.coarse_draws = aggregate_fine_to_coarse(r.fine_draws, n_, m_ratio_);
  r.coarse = simulate_hat_X(model_, p_, n_, r.coarse_draws, opt_);
  r.u_n = make_grid(model_.d, n_, p_.T);
  const double scale = std::pow(static_cast<double>(n_), p_.H);
  for (std::size_t k = 0; k <= n_; ++k) {
    for (int i = 0; i < model_.d; ++i) r.u_n(k, i) = scale * (r.fine(k * m_ratio_, i) - r.coarse(k, i));
  }
  return r;
}

CoupledRun simulate_coupled(const Model& model, const kernel::KernelParams& p, std::size_t n,
                            std::size_t m_ratio, const StreamKey& key,
                            const SimulationLimits& limits) {
  const std::size_t N = n * m_ratio;
  if (N > limits.max_fine_steps) {
    throw ResourceLimitError("simulate_coupled: fine grid of " + std::to_string(N) +
                             " steps exceeds the limit of " + std::to_string(limits.max_fine_steps));
  }
  const auto factor = gaussian::factorize(gaussian::build_covariance(p, N));
  return CoupledSimulator(model, p, n, m_ratio, factor).run(key);
}

Vec evaluate_hat_between(const Model& model, const kernel::KernelParams& p, const CoupledRun& run,
                         std::size_t fine_index) {
  const std::size_t m = run.m_ratio;
  const std::size_t N = run.n * m;
  if (fine_index > N) throw DomainError("evaluate_hat_between: time is not on the fine grid");
  if (fine_index % m == 0) return run.coarse.state(fine_index / m);
  const double delta = p.T / static_cast<double>(N);
  Vec x = model.X0;
  std::size_t frozen = static_cast<std::size_t>(-1);
  Vec bx;
  Mat sx;
  for (std::size_t q = 1; q <= fine_index; ++q) {
    const std::size_t eta = (q - 1) / m;
    if (eta != frozen) {
      const Vec xc = run.coarse.state(eta);
      bx = model.b(xc);
      sx = model.sigma(xc);
      frozen = eta;
    }
    const std::size_t h = fine_index - q + 1;
    const double wk = kernel::int_K(p, static_cast<double>(h - 1) * delta, static_cast<double>(h) * delta);
    x += bx * wk;
    for (int c = 0; c < model.m; ++c) x += sx.col(c) * run.fine_draws.at(q, c)[h];
  }
  return x;
}

GridPath hat_between_path(const Model& model, const kernel::KernelParams& p, const CoupledRun& run) {
  check_model_shape(model);
  const std::size_t m = run.m_ratio;
  const std::size_t N = run.n * m;
  if (run.fine_draws.steps() != N) throw DomainError("hat_between_path: run has no fine draws");
  const double delta = p.T / static_cast<double>(N);
  const auto w = drift_weights(p, N, delta);
  const auto d = static_cast<std::size_t>(model.d);
  std::vector<std::vector<double>> acc(d, std::vector<double>(N + 1, 0.0));
  Vec bx;
  Mat sx;
  for (std::size_t q = 1; q <= N; ++q) {
    if ((q - 1) % m == 0) {
      const Vec xc = run.coarse.state((q - 1) / m);
      bx = model.b(xc);
      sx = model.sigma(xc);
    }
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      axpy_tail(acc[i], q, N, bx(ii), w.data());
      for (int c = 0; c < model.m; ++c) axpy_tail(acc[i], q, N, sx(ii, c), run.fine_draws.at(q, c).data() + 1);
    }
  }
  GridPath path = make_grid(model.d, N, p.T);
  for (std::size_t k = 0; k <= N; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      path(k, static_cast<int>(i)) = model.X0(static_cast<Eigen::Index>(i)) + acc[i][k];
    }
  }
  return path;
}

}  // namespace sve::scheme
