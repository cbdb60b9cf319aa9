#include "sve/limit.hpp"

#include <cmath>
#include <sstream>

#include "sve/errors.hpp"

namespace sve::limit {

using scheme::Mat;
using scheme::Vec;

scheme::GridPath simulate_limit_U(const LimitRunInputs& in, const scheme::SchemeOptions& opt) {
  if (!in.model || !in.x_path || !in.w_draws || !in.b_draws) {
    throw DomainError("simulate_limit_U: inputs are incomplete");
  }
  const scheme::Model& model = *in.model;
  const int d = model.d, m = model.m;
  const std::size_t n = in.w_draws->steps();
  if (n == 0 || in.x_path->size() != n + 1 || in.x_path->d != d) {
    throw DomainError("simulate_limit_U: X path and W draws are on different grids");
  }
  if (in.w_draws->components() != m || in.b_draws->components() != m * m ||
      in.b_draws->steps() != n) {
    throw DomainError("simulate_limit_U: draws do not match the model's driving dimension");
  }
  const kernel::KernelParams& p = in.p;
  const double delta = p.T / static_cast<double>(n);
  std::vector<double> w(n);
  for (std::size_t i = 1; i <= n; ++i) {
    w[i - 1] = kernel::int_K(p, static_cast<double>(i - 1) * delta, static_cast<double>(i) * delta);
  }
  const double noise = p.C_H * in.noise_scale;
  const auto du = static_cast<std::size_t>(d);
  std::vector<std::vector<double>> acc(du, std::vector<double>(n + 1, 0.0));
  scheme::GridPath out;
  out.d = d;
  out.times = in.x_path->times;
  out.values.assign((n + 1) * du, 0.0);

  auto push = [&](std::vector<double>& a, std::size_t q, double c, const double* g) {
    if (c == 0.0) return;
    double* dst = a.data() + q;
    const std::size_t len = n - q + 1;
    for (std::size_t i = 0; i < len; ++i) dst[i] += c * g[i];
  };

  for (std::size_t q = 1; q <= n; ++q) {
    Vec u(d);
    for (int i = 0; i < d; ++i) {
      u(i) = acc[static_cast<std::size_t>(i)][q - 1];
      if (!std::isfinite(u(i)) || std::abs(u(i)) > opt.divergence_guard) {
        std::ostringstream msg;
        msg << "simulate_limit_U: error process left the finite range at step " << q - 1;
        throw DivergenceError(msg.str(), q - 1);
      }
      out(q - 1, i) = u(i);
    }
    const Vec x = in.x_path->state(q - 1);
    const Mat gb = model.grad_b(x);
    const scheme::Tensor3 gs = model.grad_sigma(x);
    const Mat sx = model.sigma(x);
    for (int i = 0; i < d; ++i) {
      auto& a = acc[static_cast<std::size_t>(i)];
      push(a, q, gb.row(i).dot(u), w.data());
      for (int j = 0; j < m; ++j) {
        double cw = 0.0;
        for (int k = 0; k < d; ++k) cw += gs(i, j, k) * u(k);
        push(a, q, cw, in.w_draws->at(q, j).data() + 1);
        for (int l = 0; l < m; ++l) {
          double cb = 0.0;
          for (int k = 0; k < d; ++k) cb += gs(i, j, k) * sx(k, l);
          push(a, q, -noise * cb, in.b_draws->at(q, m * j + l).data() + 1);
        }
      }
    }
  }
  for (int i = 0; i < d; ++i) out(n, i) = acc[static_cast<std::size_t>(i)][n];
  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(out(n, i)) || std::abs(out(n, i)) > opt.divergence_guard) {
      throw DivergenceError("simulate_limit_U: error process left the finite range at the last step", n);
    }
  }
  return out;
}

ComparisonReport compare_law(const std::vector<TerminalSample>& a,
                             const std::vector<TerminalSample>& b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("compare_law: each ensemble needs 2 samples");
  const std::size_t d = a.front().u.size(), m = a.front().w.size();
  for (const auto* e : {&a, &b}) {
    for (const auto& s : *e) {
      if (s.u.size() != d || s.w.size() != m) throw DomainError("compare_law: ragged samples");
    }
  }
  ComparisonReport rep;
  rep.count_a = a.size();
  rep.count_b = b.size();
  rep.size_warning = a.size() != b.size() || a.size() < 1000 || b.size() < 1000;

  auto column = [](const std::vector<TerminalSample>& e, bool state, std::size_t i) {
    std::vector<double> v(e.size());
    for (std::size_t r = 0; r < e.size(); ++r) v[r] = state ? e[r].u[i] : e[r].w[i];
    return v;
  };
  for (std::size_t i = 0; i < d; ++i) {
    const auto ua = column(a, true, i), ub = column(b, true, i);
    CoordinateComparison c;
    c.mean_a = stats::mean_ci(ua);
    c.mean_b = stats::mean_ci(ub);
    c.var_a = stats::variance_ci(ua);
    c.var_b = stats::variance_ci(ub);
    c.variance_overlap = c.var_a.overlaps(c.var_b);
    c.ks = stats::ks_two_sample(ua, ub);
    rep.coordinates.push_back(c);
    for (std::size_t j = 0; j < m; ++j) {
      StableDiagnostic s;
      s.state = static_cast<int>(i);
      s.brownian = static_cast<int>(j);
      s.cov_a = stats::covariance_ci(ua, column(a, false, j));
      s.cov_b = stats::covariance_ci(ub, column(b, false, j));
      s.overlap = s.cov_a.overlaps(s.cov_b);
      rep.stable.push_back(s);
    }
  }
  return rep;
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json j;
  j["count_un"] = count_a;
  j["count_u"] = count_b;
  j["size_warning"] = size_warning;
  j["coordinates"] = nlohmann::json::array();
  for (const auto& c : coordinates) {
    j["coordinates"].push_back({{"mean_un", stats::to_json(c.mean_a)},
                                {"mean_u", stats::to_json(c.mean_b)},
                                {"var_un", stats::to_json(c.var_a)},
                                {"var_u", stats::to_json(c.var_b)},
                                {"variance_overlap", c.variance_overlap},
                                {"ks", stats::to_json(c.ks)}});
  }
  j["stable"] = nlohmann::json::array();
  for (const auto& s : stable) {
    j["stable"].push_back({{"state", s.state},
                           {"brownian", s.brownian},
                           {"cov_un_w", stats::to_json(s.cov_a)},
                           {"cov_u_w", stats::to_json(s.cov_b)},
                           {"overlap", s.overlap}});
  }
  return j;
}

}  // namespace sve::limit
