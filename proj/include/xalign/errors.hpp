#pragma once

#include <stdexcept>
#include <string>

namespace xalign {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input files (EMB1, manifests, configs).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures (unreadable or unwritable paths).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters: fold counts, grids, option values.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-finite data or degenerate numerical inputs.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace xalign
