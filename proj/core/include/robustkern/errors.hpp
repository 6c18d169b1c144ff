#pragma once

#include <stdexcept>
#include <string>

namespace robustkern {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad test parameters, out-of-range corruption
// budgets, malformed experiment specs. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid or unusable input data: malformed CSV cells, ragged rows,
// samples too small to test. Maps to CLI exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// Raised by the median heuristic when all points coincide and no pairwise
// distance is positive; the caller must supply an explicit bandwidth.
class DegenerateDataError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace robustkern
