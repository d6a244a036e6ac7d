#pragma once

#include <stdexcept>
#include <string>

namespace traffic {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Enumeration or memory guard exceeded.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

// Identity residual beyond tolerance, or a failed numerical routine.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class NotInvariant : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class IllConditioned : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Probe operand with vanishing injective trace.
class ProbeFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace traffic
