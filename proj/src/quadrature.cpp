#include "sve/quadrature.hpp"

namespace sve {

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (max_subdivisions == 0) throw DomainError("max_subdivisions must be at least 1");
  if (!(tail_cutoff > 1.0)) throw DomainError("tail cutoff R must exceed 1");
}

QuadResult integrate_fn(const std::function<double(double)>& f, double a, double b,
                        const QuadratureConfig& cfg) {
  return integrate(f, a, b, cfg);
}

}  // namespace sve
