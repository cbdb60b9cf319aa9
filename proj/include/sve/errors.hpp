#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sve {

/// Argument outside the mathematical domain of an operation (kernel pole,
/// negative interval, off-grid time, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or eigensolver did not reach the requested accuracy. Carries
/// the best estimate obtained so callers can report it.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double estimate, double error_estimate)
      : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// Cholesky breakdown that survived every jitter level.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot_index, double pivot_value,
                     double jitter)
      : std::runtime_error(what),
        pivot_index_(pivot_index),
        pivot_value_(pivot_value),
        jitter_(jitter) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }
  double jitter() const noexcept { return jitter_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
  double jitter_;
};

/// A simulated state left the finite range (|x| > guard or NaN).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. `line` is 0 when the value came from
/// the command line rather than a config file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field, std::size_t line = 0)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

}  // namespace sve
