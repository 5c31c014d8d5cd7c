#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pemq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry: non-finite coordinates, self-intersections, degenerate
/// polygons, placements leaving the canvas, overlapping placements.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Input that is well-formed but violates a documented rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `line()` is 1-based; 0 means "not line specific".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// External solver violated the output-file protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (singular systems, refinement that does not terminate).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pemq
