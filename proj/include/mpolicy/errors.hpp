#pragma once

#include <stdexcept>
#include <string>

namespace mpolicy {

// Everything traceable to bad or insufficient input data. The CLI maps this
// family to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class SingularDesignError : public DataError {
 public:
  using DataError::DataError;
};

// Malformed, mis-versioned or invalid model / agent files.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values during training or simulation (exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mpolicy
