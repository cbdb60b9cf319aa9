#pragma once

// Built-in coefficient sets and a registry keyed by name.

#include <functional>
#include <string>
#include <vector>

#include "sve/scheme.hpp"

namespace sve::models {

/// b(x) = beta x, sigma(x) = sigma0 x (d = m = 1).
scheme::Model linear(double beta = 0.5, double sigma0 = 0.8, double x0 = 1.0);

/// b(x) = cos x, sigma(x) = 2 + sin x (d = m = 1).
scheme::Model trig(double x0 = 1.0);

/// d = m = 2, b_i = 0.1 tanh(x_i), sigma = [[2 + sin x1, 0.5 cos x2], [0.3, 1]].
scheme::Model planar();

/// Constant b0 and sigma0 (d = m = 1); the scheme is exact for it.
scheme::Model constant(double b0 = 0.3, double sigma0 = 1.0, double x0 = 0.0);

/// Scalar model from coefficient functions and their derivatives.
scheme::Model scalar(std::string name, std::function<double(double)> b,
                     std::function<double(double)> db, std::function<double(double)> sigma,
                     std::function<double(double)> dsigma, double x0, double derivative_bound);

struct ModelInfo {
  std::string name;
  int d = 1;
  int m = 1;
  std::string note;
  double derivative_bound = 0.0;
  scheme::JacobianCheck check;
};

const std::vector<std::string>& builtin_names();

/// Throws ConfigError naming the `model` field for unknown names.
scheme::Model make(const std::string& name);

/// Registry listing with the bounded-derivative probe run for each model.
std::vector<ModelInfo> list_models();

}  // namespace sve::models
