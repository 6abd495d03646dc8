#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace monoembed {

/// Precondition failures on public entry points (dimension mismatch, empty region, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A map evaluator produced a non-finite value or was called outside its domain.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// An order invariant that must hold exactly (sandwich, envelope monotonicity) failed.
/// Signals a wrong monotonicity declaration or numerical breakdown.
class InvariantViolation : public std::logic_error {
 public:
  InvariantViolation(const std::string& what, std::size_t iteration)
      : std::logic_error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Model configurations the library deliberately does not handle (e.g. linear rational case).
class UnsupportedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace monoembed
