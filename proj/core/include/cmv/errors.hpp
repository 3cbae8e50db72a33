#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmv {

/// Base of every error raised by the library. Callers that only need a
/// message can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateMeasure : public Error {
 public:
  using Error::Error;
};

class NumericOverflow : public Error {
 public:
  NumericOverflow(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> distances)
      : Error(what), distances_(std::move(distances)) {}
  const std::vector<double>& distances() const noexcept { return distances_; }

 private:
  std::vector<double> distances_;
};

class LevelExhaustion : public Error {
 public:
  using Error::Error;
};

class ValidationFailure : public Error {
 public:
  using Error::Error;
};

class UnknownScenario : public Error {
 public:
  using Error::Error;
};

class TreeTooLarge : public Error {
 public:
  using Error::Error;
};

class InsufficientReplications : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmv
