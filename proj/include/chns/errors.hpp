/// @file errors.hpp
/// @brief Exception hierarchy shared by all solver modules.
///
/// The CLI maps these onto exit codes: ConfigError -> 4, SolverError and
/// LinearAlgebraError -> 3. Audit failures are not exceptions.

#pragma once

#include <stdexcept>
#include <string>

namespace chns {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, physics, box or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid potential parameters (alpha <= 0, theta too wide, ...).
class ParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Newton nonconvergence, optimizer stagnation and friends.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_residual = 0.0, int step = -2)
      : Error(what), last_residual_(last_residual), step_(step) {}

  double last_residual() const { return last_residual_; }
  /// Time index of the failing step; -2 when not step-related.
  int step() const { return step_; }

 private:
  double last_residual_;
  int step_;
};

/// Singular or numerically failed factorization.
class LinearAlgebraError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace chns
