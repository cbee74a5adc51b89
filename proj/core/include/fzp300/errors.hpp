#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fzp300 {

// Error taxonomy shared by every module. Each type maps to one stable
// machine-parsable code used by the CLI (see tools/).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Shape disagreement between operands (names both shapes in the message).
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error("E_DIMENSION", message) {}
};

// Invalid request against a recorded signal (window outside recording, ...).
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& message) : Error("E_RANGE", message) {}
};

// Malformed file content; carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error("E_PARSE", message + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Inconsistent or unusable configuration (band edges past Nyquist,
// class with too few trials, missing cohorts, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("E_CONFIG", message) {}
};

// Numerical failure (SVD non-convergence, non-finite gradients).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error("E_NUMERIC", message) {}
};

// Operation called in the wrong order (backward before forward, ...).
class StateError : public Error {
 public:
  explicit StateError(const std::string& message) : Error("E_STATE", message) {}
};

// Filesystem failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("E_IO", message) {}
};

}  // namespace fzp300
