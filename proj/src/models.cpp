#include "sve/models.hpp"

#include <cmath>

#include "sve/errors.hpp"

namespace sve::models {

using scheme::Mat;
using scheme::Model;
using scheme::Tensor3;
using scheme::Vec;

Model scalar(std::string name, std::function<double(double)> b, std::function<double(double)> db,
             std::function<double(double)> sigma, std::function<double(double)> dsigma, double x0,
             double derivative_bound) {
  Model mdl;
  mdl.name = std::move(name);
  mdl.d = 1;
  mdl.m = 1;
  mdl.X0 = Vec::Constant(1, x0);
  mdl.b = [b](const Vec& x) { return Vec::Constant(1, b(x(0))); };
  mdl.sigma = [sigma](const Vec& x) { return Mat::Constant(1, 1, sigma(x(0))); };
  mdl.grad_b = [db](const Vec& x) { return Mat::Constant(1, 1, db(x(0))); };
  mdl.grad_sigma = [dsigma](const Vec& x) {
    Tensor3 t(1, 1);
    t(0, 0, 0) = dsigma(x(0));
    return t;
  };
  mdl.derivative_bound = derivative_bound;
  return mdl;
}

Model linear(double beta, double sigma0, double x0) {
  Model mdl = scalar(
      "linear", [beta](double x) { return beta * x; }, [beta](double) { return beta; },
      [sigma0](double x) { return sigma0 * x; }, [sigma0](double) { return sigma0; }, x0,
      std::max(std::abs(beta), std::abs(sigma0)));
  mdl.note = "globally Lipschitz, constant derivatives";
  return mdl;
}

Model trig(double x0) {
  Model mdl = scalar(
      "trig", [](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
      [](double x) { return 2.0 + std::sin(x); }, [](double x) { return std::cos(x); }, x0, 1.0);
  mdl.note = "bounded coefficients, derivatives bounded by 1";
  return mdl;
}

Model constant(double b0, double sigma0, double x0) {
  Model mdl = scalar(
      "constant", [b0](double) { return b0; }, [](double) { return 0.0; },
      [sigma0](double) { return sigma0; }, [](double) { return 0.0; }, x0, 0.0);
  mdl.note = "constant coefficients, scheme is exact";
  return mdl;
}

Model planar() {
  Model mdl;
  mdl.name = "planar";
  mdl.d = 2;
  mdl.m = 2;
  mdl.X0 = Vec(2);
  mdl.X0 << 0.5, -0.5;
  mdl.b = [](const Vec& x) {
    Vec r(2);
    r << 0.1 * std::tanh(x(0)), 0.1 * std::tanh(x(1));
    return r;
  };
  mdl.sigma = [](const Vec& x) {
    Mat s(2, 2);
    s << 2.0 + std::sin(x(0)), 0.5 * std::cos(x(1)), 0.3, 1.0;
    return s;
  };
  mdl.grad_b = [](const Vec& x) {
    Mat g = Mat::Zero(2, 2);
    const double c0 = std::cosh(x(0)), c1 = std::cosh(x(1));
    g(0, 0) = 0.1 / (c0 * c0);
    g(1, 1) = 0.1 / (c1 * c1);
    return g;
  };
  mdl.grad_sigma = [](const Vec& x) {
    Tensor3 t(2, 2);
    t(0, 0, 0) = std::cos(x(0));
    t(0, 1, 1) = -0.5 * std::sin(x(1));
    return t;
  };
  mdl.derivative_bound = 1.0;
  mdl.note = "smooth bounded coefficients, derivatives bounded by 1";
  return mdl;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"linear", "trig", "planar", "constant"};
  return names;
}

Model make(const std::string& name) {
  if (name == "linear") return linear();
  if (name == "trig") return trig();
  if (name == "planar") return planar();
  if (name == "constant") return constant();
  throw ConfigError("unknown model '" + name + "'", "model");
}

std::vector<ModelInfo> list_models() {
  std::vector<ModelInfo> out;
  for (const auto& name : builtin_names()) {
    const Model mdl = make(name);
    ModelInfo info;
    info.name = mdl.name;
    info.d = mdl.d;
    info.m = mdl.m;
    info.note = mdl.note;
    info.derivative_bound = mdl.derivative_bound;
    info.check = scheme::check_model(mdl);
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace sve::models
