#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iwri {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonpositive, non-finite or otherwise unusable model values.
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// Positions or boxes that fall outside the physical grid.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid scalar parameter (frequency, penalty, step length, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown of a factorization.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::ptrdiff_t pivot = -1)
      : Error(what), pivot_(pivot) {}
  /// Index of the failing pivot, -1 when the backend does not report one.
  std::ptrdiff_t pivot() const { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

/// Malformed model/dataset file.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Invalid run configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace iwri
