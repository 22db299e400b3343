#pragma once

#include <stdexcept>
#include <string>

namespace ehist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested enumeration or tensor size is beyond what this library will build.
class ScenarioTooLarge : public Error {
 public:
  using Error::Error;
};

class GridConflict : public Error {
 public:
  using Error::Error;
};

// Raised when a history with zero weight is asked to be normalized.
class InconsistentHistory : public Error {
 public:
  using Error::Error;
};

class UnsupportedReduction : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace ehist
