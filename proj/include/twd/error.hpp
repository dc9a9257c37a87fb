#pragma once

#include <stdexcept>
#include <string>

namespace twd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad file, bad parameter, violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Well-formed problem with no feasible solution (budget, missing circuit).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant. Seeing one is a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_input(const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) throw_input(what);
}

}  // namespace twd
