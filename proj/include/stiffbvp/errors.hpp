#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stiffbvp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A right-hand side, Jacobian or boundary evaluation produced a non-finite
/// value or hit a zero denominator.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::size_t component)
      : Error(what + " (component " + std::to_string(component) + ")"), component_(component) {}
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

/// A state cannot be expressed in the requested variables (zero flipped component).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class RefinementError : public Error {
 public:
  using Error::Error;
};

/// An interval has zero length in its own independent variable.
class SingularStepError : public Error {
 public:
  SingularStepError(const std::string& what, std::size_t interval)
      : Error(what + " (interval " + std::to_string(interval) + ")"), interval_(interval) {}
  std::size_t interval() const noexcept { return interval_; }

 private:
  std::size_t interval_;
};

/// Newton iterations exhausted or the damping floor was hit.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, int iterations)
      : Error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

class SingularLinearSystem : public Error {
 public:
  SingularLinearSystem(const std::string& what, std::size_t pivot)
      : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// A swap on a boundary interval would move the boundary point itself.
class NonStationaryBoundary : public Error {
 public:
  using Error::Error;
};

class StrategyError : public Error {
 public:
  using Error::Error;
};

class ColdStartFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace stiffbvp
