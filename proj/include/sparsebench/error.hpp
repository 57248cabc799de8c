#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsebench {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments when building a matrix, permutation or blocked layout.
class ConstructionError : public Error {
public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Malformed Matrix Market input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::size_t line_;
  std::string detail_;
};

/// Collection lookup, download or cache failures.
class FetchError : public Error {
public:
  using Error::Error;
};

/// A metric was requested where it is undefined.
class MetricError : public Error {
public:
  using Error::Error;
};

/// Failures inside the timing harness or microbenchmarks.
class BenchError : public Error {
public:
  using Error::Error;
};

}  // namespace sparsebench
