#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace prefelicit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profiles, parameters or ids that do not fit together.
class InvalidScenarioError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Response enumeration would exceed the configured cap.
class TooLargeError : public Error {
 public:
  using Error::Error;
};

/// A question the cost model has no price for.
class CostModelError : public Error {
 public:
  using Error::Error;
};

/// A criterion or experiment configuration that does not match the scenario.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario/trace/cost files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// The CML optimizer ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                   double gradient_norm)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gradient_norm_;
};

}  // namespace prefelicit
