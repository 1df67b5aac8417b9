#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cnr {

// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed something malformed: bad shapes, non-finite values,
// out-of-range configuration.
struct InvalidInput : Error {
  using Error::Error;
};

// Knot construction collapsed two knots onto the same location.
struct DegenerateKnots : Error {
  using Error::Error;
};

// A transformation slope is non-positive where it should be strictly
// positive. `index` is the offending sample when the check ran over a
// dataset, npos otherwise.
struct InfeasiblePoint : Error {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  explicit InfeasiblePoint(const std::string& msg, std::size_t index_ = npos)
      : Error(msg), index(index_) {}
  std::size_t index;
};

// An iterative solver produced non-finite iterates or failed to reach its
// stopping rule within the iteration budget.
struct Diverged : Error {
  using Error::Error;
};

// The reference optimizer could not build a strictly feasible start.
struct InfeasibleStart : Error {
  using Error::Error;
};

// Residual variance is numerically zero, so a Gaussian fit is degenerate.
struct ZeroVariance : Error {
  using Error::Error;
};

// A text field failed to parse. `line` is 1-based and counts the header.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line_) : Error(msg), line(line_) {}
  std::size_t line;
};

// A file's layout does not match what was asked of it (missing column,
// missing field, wrong header).
struct SchemaError : Error {
  using Error::Error;
};

// Not enough usable rows to honor the request.
struct InsufficientData : Error {
  using Error::Error;
};

}  // namespace cnr
