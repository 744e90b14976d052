#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oscillode {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A nonzero combination of base frequencies fell below the configured
/// threshold; the recursion would divide by it.
class SmallDenominator : public Error {
 public:
  SmallDenominator(const std::string& message, std::vector<int> tuple, double magnitude)
      : Error(message), tuple_(std::move(tuple)), magnitude_(magnitude) {}
  const std::vector<int>& tuple() const { return tuple_; }
  double magnitude() const { return magnitude_; }

 private:
  std::vector<int> tuple_;
  double magnitude_;
};

/// A differential or amplitude derivative beyond the declared maximum order.
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the interval a solution was computed on.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

class MaxStepsExceeded : public Error {
 public:
  using Error::Error;
};

/// (i eta I - A) is numerically singular for some forcing frequency.
class SingularResolvent : public Error {
 public:
  using Error::Error;
};

/// Analytic differentials disagree with finite differences.
class ValidationFailed : public Error {
 public:
  using Error::Error;
};

/// Non-oscillatory coefficient chain could not be integrated.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace oscillode
