#pragma once

#include <stdexcept>
#include <string>

namespace swerve {

/// Category of a domain error. The CLI maps all of these to exit code 1.
enum class ErrorKind {
  InvalidConfig,
  InvalidInput,
  DegenerateTrajectory,
  NoOverlap,
  DegenerateFit,
  InvalidState,
  FitFailure,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Rank-deficient or otherwise unsolvable least-squares problem.
class DegenerateFitError : public Error {
public:
  DegenerateFitError(const std::string& what, double condition_estimate)
      : Error(ErrorKind::DegenerateFit, what),
        condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

private:
  double condition_estimate_;
};

/// Unreadable, malformed, or incomplete input data (bad CSV rows, missing
/// config fields, empty files). Kept distinct from Error so the CLI can map
/// input problems to exit code 2 instead of 1.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace swerve
