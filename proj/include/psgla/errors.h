#pragma once

#include <stdexcept>
#include <string>

namespace psgla {

// Root of the library's exception hierarchy. The CLI maps the branches to
// exit codes: InputError -> 2, everything numeric -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: dimension mismatch, out-of-range parameters, infeasible x0.
class InputError : public Error {
 public:
  using Error::Error;
};

// Configuration file problems; `path` is the dotted field path ("sampler.eta").
class ConfigError : public InputError {
 public:
  ConfigError(std::string path, const std::string& message)
      : InputError(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A geometric object violates its own invariants (e.g. unbounded polytope).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Uniform rejection sampling over a body became hopeless (rate < 1e-6).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// Gibbs rejection sampling acceptance below 1e-6: beta too large for the domain.
class TemperatureError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Damping ratio exactly 1; neither closed form of the oscillator applies.
class DegenerateDampingError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace psgla
