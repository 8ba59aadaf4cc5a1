#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cqrlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector or matrix had the wrong length. Carries both sizes so callers can
/// report them without parsing the message.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t given)
      : Error(what + ": expected length " + std::to_string(expected) + ", given " +
              std::to_string(given)),
        expected_(expected),
        given_(given) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t given() const noexcept { return given_; }

 private:
  std::size_t expected_;
  std::size_t given_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite value encountered in a numerical update.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int layer)
      : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}

  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Malformed file. `record` is the 1-based data record (0 for the header).
class FormatError : public Error {
 public:
  FormatError(const std::string& path, std::size_t record, const std::string& what)
      : Error(path + ": record " + std::to_string(record) + ": " + what), record_(record) {}

  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

/// Data and run configuration disagree (env name, dims, algorithm, quantiles).
class MismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace cqrlab
