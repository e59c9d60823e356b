#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace holosense {

// Bad caller input: non-unit directions, out-of-range sites, mismatched dimensions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that happen while computing on valid input.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public ComputationError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : ComputationError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class AmbiguousQuartet : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class FrameExtractionError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class ImpossibleOutcome : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class NotAQubitState : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class StepSizeError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class DegenerateGeometry : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class RankDeficient : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace holosense
