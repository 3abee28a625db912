#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bflow {

/// Wrong vector/matrix/grid dimensions.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Parameter outside its admissible range.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Too few samples to form the requested statistic.
class InsufficientDataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf encountered inside an iterative solve.
class NumericalBreakdown : public std::runtime_error {
public:
  NumericalBreakdown(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const { return iteration_; }

private:
  int iteration_;
};

/// Malformed input file; carries the byte offset of the failure.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

/// Filesystem failure distinct from malformed content.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace bflow
