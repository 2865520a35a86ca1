#pragma once

#include <stdexcept>
#include <string>

namespace hardi {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or argument violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents do not match the declared format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed (singular system, non-convergence, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_validation(const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) throw_validation(what);
}

}  // namespace hardi
