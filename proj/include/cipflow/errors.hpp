#pragma once

#include <stdexcept>
#include <string>

namespace cipflow {

/// Invalid mesh input or connectivity.
class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid finite-element setup (degree, mismatched spaces, parameters).
class SetupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration file or command-line error (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization or solve failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Velocity growth beyond the blow-up threshold or a non-finite value (CLI exit code 3).
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, int step, double time)
      : std::runtime_error(what), step_(step), time_(time) {}
  int step() const { return step_; }
  double time() const { return time_; }

 private:
  int step_;
  double time_;
};

}  // namespace cipflow
