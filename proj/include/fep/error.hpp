#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fep {

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char trial[32];
    std::snprintf(trial, sizeof trial, "%.*g", prec, v);
    if (std::strtod(trial, nullptr) == v) return trial;
  }
  return buf;
}

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (non-ergodic state, profile below 1/2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

class StateSpaceTooLarge : public Error {
 public:
  using Error::Error;
};

class InconsistentShape : public Error {
 public:
  using Error::Error;
};

class InconsistentMass : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised when a requested time step exceeds the explicit stability bound.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double admissible_dt)
      : Error(what + " (admissible dt <= " + format_double(admissible_dt) + ")"),
        admissible_dt_(admissible_dt) {}

  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double admissible_dt_;
};

/// A numerical scheme left its invariant region.
class SchemeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fep
