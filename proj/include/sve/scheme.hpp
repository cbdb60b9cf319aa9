#pragma once

// Solvers for X_t = X0 + int K(t-s) b(X_s) ds + int K(t-s) sigma(X_s) dW_s:
// the exact-increment scheme, a left-point Euler baseline, evaluation of the
// scheme between coarse grid points, and nested fine/coarse coupling.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sve/gaussian.hpp"
#include "sve/kernel.hpp"
#include "sve/rng.hpp"

namespace sve::scheme {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// d x m x d array holding d sigma^i_j / d x_k at (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d, int m) : d_(d), m_(m), data_(static_cast<std::size_t>(d * m * d), 0.0) {}

  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  int d() const noexcept { return d_; }
  int m() const noexcept { return m_; }

 private:
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>((i * m_ + j) * d_ + k);
  }
  int d_ = 0;
  int m_ = 0;
  std::vector<double> data_;
};

struct Model {
  std::string name;
  int d = 1;
  int m = 1;
  Vec X0;
  std::function<Vec(const Vec&)> b;
  std::function<Mat(const Vec&)> sigma;
  std::function<Mat(const Vec&)> grad_b;  ///< row i = gradient of b^i
  std::function<Tensor3(const Vec&)> grad_sigma;
  /// Declared bound on every first derivative of b and sigma.
  double derivative_bound = 1.0;
  std::string note;
};

struct JacobianCheck {
  bool ok = false;
  double max_fd_error = 0.0;    ///< finite differences vs declared Jacobians
  double max_derivative = 0.0;  ///< largest |derivative| seen on the probe grid
};

/// Central differences on a probe grid around X0 (radius, points per axis).
JacobianCheck check_model(const Model& model, double radius = 3.0, int points = 9,
                          double tol = 1e-5);

struct GridPath {
  int d = 1;
  std::vector<double> times;
  std::vector<double> values;  ///< row-major (times.size() x d)

  std::size_t size() const noexcept { return times.size(); }
  double operator()(std::size_t k, int i) const {
    return values[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
  }
  double& operator()(std::size_t k, int i) {
    return values[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
  }
  Vec state(std::size_t k) const;
};

/// CSV with header `t,x1,...,xd` and shortest round-trip decimals.
void write_csv(std::ostream& os, const GridPath& path);

/// Per-step kernel-weighted increments for every Brownian component.
/// at(k, c)[0] is the plain increment of step k (1-based) and at(k, c)[i],
/// i >= 1, is int_{t_{k-1}}^{t_k} K(t_{k+i-1} - s) dW^c_s.
class StepDraws {
 public:
  StepDraws() = default;
  StepDraws(std::size_t n, int components);

  std::size_t steps() const noexcept { return n_; }
  int components() const noexcept { return components_; }
  std::span<const double> at(std::size_t k, int c) const;
  std::span<double> at(std::size_t k, int c);
  /// Plain Brownian increment of step k.
  double plain(std::size_t k, int c) const { return at(k, c)[0]; }

 private:
  std::size_t offset(std::size_t k, int c) const;
  std::size_t n_ = 0;
  int components_ = 0;
  std::size_t per_component_ = 0;
  std::vector<double> data_;
};

/// Samples every step of an n-step grid from a factor of the (n+1)-dim
/// table. Component c uses key.component = component_base + c and
/// key.step = k.
StepDraws draw_steps(const gaussian::FactorizedCovariance& factor, std::size_t n, int components,
                     const StreamKey& key, std::uint64_t component_base = 0);

struct SchemeOptions {
  double divergence_guard = 1e12;
};

/// Exact-increment scheme on t_k = k T / n, cost O(n^2 d m).
GridPath simulate_hat_X(const Model& model, const kernel::KernelParams& p, std::size_t n,
                        const StepDraws& draws, const SchemeOptions& opt = {});

/// Left-point Euler baseline driven by the plain increments (step, component).
GridPath simulate_euler(const Model& model, const kernel::KernelParams& p, std::size_t n,
                        std::span<const double> plain_increments, const SchemeOptions& opt = {});

/// Plain increments of a draw set laid out as (step, component).
std::vector<double> plain_increments(const StepDraws& draws);

/// Sums fine increments over each coarse step at the coarse horizons.
StepDraws aggregate_fine_to_coarse(const StepDraws& fine, std::size_t n, std::size_t m_ratio);

struct CoupledRun {
  std::size_t n = 0;
  std::size_t m_ratio = 1;
  GridPath fine;
  GridPath coarse;
  GridPath u_n;  ///< n^H (fine at coarse times - coarse)
  StepDraws fine_draws;
  StepDraws coarse_draws;
};

struct SimulationLimits {
  std::size_t max_fine_steps = 8192;
};

/// Holds the fine factor so replications share it read-only.
class CoupledSimulator {
 public:
  CoupledSimulator(Model model, kernel::KernelParams p, std::size_t n, std::size_t m_ratio,
                   const gaussian::FactorizedCovariance& fine_factor, SchemeOptions opt = {});

  CoupledRun run(const StreamKey& key) const;
  std::size_t fine_steps() const noexcept { return n_ * m_ratio_; }
  const Model& model() const noexcept { return model_; }
  const kernel::KernelParams& params() const noexcept { return p_; }

 private:
  Model model_;
  kernel::KernelParams p_;
  std::size_t n_;
  std::size_t m_ratio_;
  const gaussian::FactorizedCovariance& factor_;
  SchemeOptions opt_;
};

/// Convenience wrapper that builds and factorizes the fine table itself.
CoupledRun simulate_coupled(const Model& model, const kernel::KernelParams& p, std::size_t n,
                            std::size_t m_ratio, const StreamKey& key,
                            const SimulationLimits& limits = {});

/// Scheme value at fine grid index `fine_index` of a coupled run, with
/// coefficients frozen at coarse left endpoints. Coarse grid points return
/// the coarse path value itself.
Vec evaluate_hat_between(const Model& model, const kernel::KernelParams& p, const CoupledRun& run,
                         std::size_t fine_index);

/// The same evaluation at every fine grid point (coarse points included,
/// computed by the between-grid formula), cost O(N^2 d m).
GridPath hat_between_path(const Model& model, const kernel::KernelParams& p,
                          const CoupledRun& run);

}  // namespace sve::scheme
