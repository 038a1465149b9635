#pragma once

#include <stdexcept>
#include <string>

namespace ampc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid argument or malformed input data.
class InputError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "input_error"; }
};

/// A size computation does not fit the representable range.
class CapacityError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "capacity_error"; }
};

/// Rank-deficient least-squares design.
class DegeneracyError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "degeneracy_error"; }
};

/// Failure of a numerical kernel (linear solve, quadrature).
class NumericalError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical_error"; }
};

/// Approximate density has mass where the reference density vanishes.
class SupportError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "support_error"; }
};

/// A forward-model evaluation failed; carries the offending parameter point.
class ModelError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "model_error"; }
};

} // namespace ampc
