#pragma once

#include <stdexcept>
#include <string>

namespace sandpile {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

class BoxMismatch : public Error {
 public:
  using Error::Error;
};

class NotStabilizing : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class SingularPoint : public Error {
 public:
  using Error::Error;
};

class SingularBoundary : public Error {
 public:
  using Error::Error;
};

class SupportEscape : public Error {
 public:
  using Error::Error;
};

class CropOutOfBounds : public Error {
 public:
  using Error::Error;
};

/// Malformed "sfield v1" stream or invalid argument value.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sandpile
