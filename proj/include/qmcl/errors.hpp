#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmcl {

/// Base of every error raised by the library. The CLI maps subclasses to
/// exit codes: NumericError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or unsupported size.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Qubit or element index outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value, degenerate norm, or a NaN loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Violation of a dataset contract (e.g. train/test class overlap).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed tensor file. Carries the byte offset at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace qmcl
