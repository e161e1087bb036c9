#pragma once

#include <stdexcept>
#include <string>

namespace optinet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a precondition (bad parameter, size mismatch, k out of range).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or unusable (bad CSV row, non-finite coordinate).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The point configuration cannot be handled (duplicate prototypes, LP failure).
class GeometryError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace optinet
