#pragma once

#include <stdexcept>
#include <string>

namespace critlab {

// Bad input or an operation called outside its domain. Maps to exit status 1.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Solver did not converge, lost precision, or refused to extrapolate. Exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace critlab
