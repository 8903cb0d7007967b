#pragma once

#include <stdexcept>
#include <string>

namespace wavedecay {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or configuration value was rejected.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value or failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised inside one pipeline stage of an experiment.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace wavedecay
