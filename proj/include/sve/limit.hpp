#pragma once

// The linear limit equation for the normalized error,
//   U^i_t = sum_k int K(t-s) d_k b^i(X_s) U^k_s ds
//         + sum_{j,k} int K(t-s) d_k sigma^i_j(X_s) U^k_s dW^j_s
//         - C_H sum_{j,k,l} int K(t-s) d_k sigma^i_j(X_s) sigma^k_l(X_s) dB^{l,j}_s,
// discretized by the exact-increment recursion with coefficients frozen at
// grid points, and law comparisons between U^n and U.

#include <json.hpp>
#include <vector>

#include "sve/kernel.hpp"
#include "sve/scheme.hpp"
#include "sve/stats.hpp"

namespace sve::limit {

struct LimitRunInputs {
  const scheme::Model* model = nullptr;
  kernel::KernelParams p;
  const scheme::GridPath* x_path = nullptr;  ///< X at the n + 1 grid points
  const scheme::StepDraws* w_draws = nullptr;  ///< m components
  const scheme::StepDraws* b_draws = nullptr;  ///< m^2 components, index m*j + l
  /// Multiplies C_H; 1 gives the limit equation itself.
  double noise_scale = 1.0;
};

scheme::GridPath simulate_limit_U(const LimitRunInputs& in, const scheme::SchemeOptions& opt = {});

/// Terminal values of one replication: U_T (d) and W_T (m).
struct TerminalSample {
  std::vector<double> u;
  std::vector<double> w;
};

struct CoordinateComparison {
  stats::Interval mean_a, mean_b;
  stats::Interval var_a, var_b;
  bool variance_overlap = false;
  stats::KSResult ks;
};

struct StableDiagnostic {
  int state = 0;
  int brownian = 0;
  stats::Interval cov_a, cov_b;  ///< cov(U_T^state, W_T^brownian)
  bool overlap = false;
};

struct ComparisonReport {
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  bool size_warning = false;  ///< sizes differ or fall below 1000
  std::vector<CoordinateComparison> coordinates;
  std::vector<StableDiagnostic> stable;

  nlohmann::json to_json() const;
};

/// a = U^n ensemble, b = U ensemble.
ComparisonReport compare_law(const std::vector<TerminalSample>& a,
                             const std::vector<TerminalSample>& b);

}  // namespace sve::limit
