#pragma once

#include <stdexcept>
#include <string>

namespace cgc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An input for which the operation is undefined (zero matrix, zero gradient).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A linear program or oracle whose optimum is unbounded.
class UnboundedError : public Error {
 public:
  using Error::Error;
};

/// Starting point outside the feasible set, or an infeasible LP.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Operation not offered for the requested constraint kind.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (IDX, network text).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgc
