#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hotlane {

// Process exit codes, one per error class.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  config = 2,
  assumption = 3,
  controller = 4,
  io = 5,
  internal = 6,  // anything not classified above
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Malformed, missing or unknown configuration keys and invariant violations.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

/// Inputs outside the congested regime the model assumes
/// (q1 < c1, q1 + q2 > c1, total demand above total capacity).
class AssumptionError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::assumption; }
};

/// The price law's log argument is not positive. Carries the step index when
/// raised from inside a simulation.
class LogDomainError : public AssumptionError {
 public:
  explicit LogDomainError(const std::string& what, std::ptrdiff_t step = -1)
      : AssumptionError(what), step_(step) {}
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

/// A controller cannot produce a finite price (e.g. the self-learning
/// filter's price coefficient collapsed to zero).
class ControllerError : public Error {
 public:
  explicit ControllerError(const std::string& what, std::ptrdiff_t step = -1)
      : Error(what), step_(step) {}
  ExitCode exit_code() const noexcept override { return ExitCode::controller; }
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

/// Phase-boundary search was given a bracket whose ends classify alike.
class BoundaryNotBracketedError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

}  // namespace hotlane
