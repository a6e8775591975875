#pragma once

#include <stdexcept>
#include <string>

namespace invforge {

// All engine failures are structured; the CLI maps them to exit code 2.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct StructuralError : Error {
  using Error::Error;
};
struct FormError : Error {
  using Error::Error;
};
struct HomogeneityError : Error {
  using Error::Error;
};
struct SlotError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct CountError : Error {
  using Error::Error;
};
struct KindError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct EvalError : Error {
  using Error::Error;
};
struct OutOfScopeError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};

}  // namespace invforge
